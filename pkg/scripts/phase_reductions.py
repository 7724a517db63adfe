"""Position and momentum reductions of the phase-space functional against E_TF."""
from dftatoms import phasespace as ps, thomasfermi as tf

print("Z,mode,energy,tf_energy,relative_gap,particle_number")
for Z in (1.0, 3.0, 10.0, 30.0):
    sol = tf.solve_tf_neutral(Z)
    for res in (ps.reduce_position(Z, tf=sol), ps.reduce_momentum(Z, tf=sol)):
        print(f"{Z:g},{res.mode},{res.energy:.12g},{res.tf_energy:.12g},{res.relative_gap:.3e},"
              f"{res.particle_number:.8f}", flush=True)
