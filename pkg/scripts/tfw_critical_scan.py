"""Critical electron number of the TFW atom against the excess-charge bound."""
import argparse

from dftatoms import thomasfermi as tf, tfw
from dftatoms.errors import SolverError

ap = argparse.ArgumentParser()
ap.add_argument("--z", type=float, nargs="+", default=[1.0, 2.0, 5.0])
ap.add_argument("--lambdas", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3])
args = ap.parse_args()

print("Z,lambda,n_lower,n_upper,bound")
for Z in args.z:
    for lam in args.lambdas:
        bound = Z + tfw.EXCESS_CHARGE_CONSTANT * (lam / (2 * tf.GAMMA_TF)) ** 1.5
        try:
            lo, hi = tfw.critical_charge(Z, lam)
            print(f"{Z:g},{lam:g},{lo:.6f},{hi:.6f},{bound:.6f}", flush=True)
        except SolverError as exc:
            print(f"{Z:g},{lam:g},,,{bound:.6f}  # {exc}", flush=True)
