"""ED energy of contracted profiles μ³ρ(μr) with ρ = Z e^{-2r}/π (boundedness probe).

An exponential profile keeps the gradient term finite; TF profiles have an
r^{-3/2} cusp for which it diverges logarithmically.
"""
import numpy as np

from dftatoms import engel_dreizler as ed, numerics as nm

g = nm.default_grid()
mus = np.logspace(0, 4, 33)
print("Z,mu,energy")
for Z in (10.0, 50.0, 80.0, 100.0):
    rho = nm.RadialDensity(g, Z * np.exp(-2 * g.nodes) / np.pi)
    scan = ed.scaling_scan(rho, ed.EdParams(Z), mus)
    for m, e in zip(scan["mu"], scan["energy"]):
        print(f"{Z:g},{m:.6g},{e:.12g}")
