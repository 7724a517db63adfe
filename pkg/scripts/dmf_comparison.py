"""HF, Müller and FCI minima on the bundled finite-basis problems."""
from dftatoms import dmf, verify

print("problem,M,N,hf,mueller,fci,mueller_below_fci")
for p, N in verify.bundled_cases():
    _, e_hf = dmf.minimize_dmf(p, N, "hf")
    _, e_mu = dmf.minimize_dmf(p, N, "mueller")
    e_fci = dmf.fci_energy(p, N)
    print(f"{p.name},{p.M},{N},{e_hf:.12g},{e_mu:.12g},{e_fci:.12g},{e_mu <= e_fci}", flush=True)
