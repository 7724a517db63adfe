"""E_TF(Z)/Z^{7/3} across nuclear charges; CSV on stdout."""
import sys

from dftatoms import thomasfermi as tf

print("Z,energy,energy_over_z73,mass,mu")
for Z in (1, 2, 5, 10, 20, 50, 100, 200):
    s = tf.solve_tf_neutral(float(Z))
    print(f"{Z},{s.energy:.12g},{s.energy / Z ** (7 / 3):.12g},{s.mass:.12g},{s.mu:.6g}")
    sys.stdout.flush()
