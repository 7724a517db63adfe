"""Relative gap between TFW and TF energies of the neutral Z = 1 atom as λ → 0.

The gap shrinks roughly like √λ, so a 2% agreement needs λ near 1e-4.
"""
import numpy as np

from dftatoms import thomasfermi as tf, tfw

e_tf = tf.solve_tf_neutral(1.0).energy
print("lambda,energy,relative_gap,gap_over_sqrt_lambda")
for lam in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4):
    e = tfw.minimize_tfw(1.0, 1.0, lam).energy
    gap = (e - e_tf) / abs(e_tf)
    print(f"{lam:g},{e:.12g},{gap:.6g},{gap / np.sqrt(lam):.4f}", flush=True)
