"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""
import subprocess
import sys
import time

import numpy as np

from dftatoms import (appendix, constraint_search as cs, dmf, engel_dreizler as ed, fockspace as fs,
                      numerics as nm, phasespace as ps, thomasfermi as tf, tfw, verify)

RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (bool(ok), detail)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def cli(*args, timeout=600):
    return subprocess.run([sys.executable, "-m", "dftatoms", *args], capture_output=True, timeout=timeout)


def test_criterion_01_tf_energy():
    import json

    t0 = time.perf_counter()
    proc = cli("tf", "solve", "--z", "1")
    dt = time.perf_counter() - t0
    e = json.loads(proc.stdout)["energy_hartree"]
    record(1, proc.returncode == 0 and abs(e + 0.7687) <= 1e-3 and dt < 5,
           f"E_TF(1) = {e:.6f} in {dt:.2f} s")


def test_criterion_02_scaling():
    t0 = time.perf_counter()
    E = {Z: tf.solve_tf_neutral(Z).energy for Z in (1.0, 10.0, 100.0)}
    dt = time.perf_counter() - t0
    dev = max(abs(E[Z] / Z ** (7 / 3) - E[1.0]) for Z in E)
    record(2, dev < 1e-3 and dt < 30, f"max |E/Z^(7/3) - E(1)| = {dev:.2e} in {dt:.1f} s")


def test_criterion_03_minimizer_properties():
    worst, shapes = 0.0, True
    for Z in (1.0, 10.0, 100.0):
        s = tf.solve_tf_neutral(Z)
        sh = tf.check_minimizer_shape(s)
        shapes &= sh["phi_nonnegative"] and sh["nonincreasing"] and sh["convex"]
        worst = max(worst, abs(s.mass - Z) / Z)
    record(3, shapes and worst <= 1e-4, f"mass error {worst:.1e}, shape checks {'ok' if shapes else 'violated'}")


def test_criterion_04_lower_bound():
    g = nm.default_grid()
    rng = np.random.default_rng(4)
    low = min(tf.tf_energy(tf.random_trial_density(g, Z, rng), Z) / Z ** (7 / 3)
              for Z in (1.0, 4.0, 16.0) for _ in range(200))
    record(4, low >= -1.46, f"min E/Z^(7/3) over 600 densities = {low:.4f}")


def test_criterion_05_tfw_critical():
    t0 = time.perf_counter()
    lo, hi = tfw.critical_charge(1.0, 0.2)
    masses = []
    for Z in (1.0, 5.0):
        lz, hz = tfw.critical_charge(Z, 0.2)
        s = tfw.minimize_tfw(Z, 0.5 * (Z + lz), 0.2)
        masses.append(max(s.mass, hz) / (2 * Z))
    dt = time.perf_counter() - t0
    record(5, 1 < lo <= hi <= 1.82 and max(masses) < 1 and dt < 120,
           f"N_c(1) in ({lo:.5f}, {hi:.5f}], max mass/2Z = {max(masses):.3f}, {dt:.1f} s")


def test_criterion_06_macke():
    rng = np.random.default_rng(6)
    x = np.linspace(-12, 12, 4001)
    w = nm.uniform_weights(x.size, x[1] - x[0])
    gram = dens = kin = 0.0
    for k in range(20):
        N = (1, 2, 3, 5)[k % 4]
        v = sum(rng.uniform(0.2, 1) * np.exp(-((x - rng.uniform(-2, 2)) ** 2) / (2 * rng.uniform(0.5, 1.5) ** 2))
                for _ in range(rng.integers(1, 4)))
        rho = v * N / (w @ v)
        o = cs.macke_orbitals_1d(x, rho, rng.random())
        gram = max(gram, np.abs(o.gram() - np.eye(N)).max())
        dens = max(dens, np.abs(o.density() - rho).max())
        _, direct = cs.macke_kinetic_at_optimum(x, rho)
        kin = max(kin, abs(direct - cs.kinetic_upper_bound_1d(x, rho)))
    record(6, gram < 1e-10 and dens < 1e-10 and kin < 1e-6,
           f"Gram {gram:.1e}, density {dens:.1e}, kinetic identity {kin:.1e}")


def test_criterion_07_car():
    worst = 0.0
    for M in range(1, 7):
        a = [fs.annihilation_matrix(M, k).toarray() for k in range(M)]
        eye = np.eye(1 << M)
        for m in range(M):
            for n in range(M):
                worst = max(worst, np.abs(a[m] @ a[n] + a[n] @ a[m]).max(),
                            np.abs(a[m].T @ a[n] + a[n] @ a[m].T - (m == n) * eye).max())
    p = dmf.random_problem(6, seed=7)
    trace = max(abs(np.trace(fs.reduced_density_matrix(fs.ground_state(fs.assemble_hamiltonian(p.spec()), N)[1], 1)) - N)
                for N in range(7))
    record(7, worst <= 1e-12 and trace <= 1e-12, f"CAR residual {worst:.1e}, 1-RDM trace error {trace:.1e}")


def test_criterion_08_dmf():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    xd = -np.inf
    occ = hf_fci = mu_hf = eq = 0.0
    hf_fci = np.inf
    for p, N in verify.bundled_cases():
        for _ in range(1000):
            g = dmf.random_density_matrix(p.M, rng.uniform(0.5, p.M - 0.5), rng).matrix
            xd = max(xd, dmf.exchange_energy(g, p) - dmf.direct_energy(g, p))
        g_hf, e_hf = dmf.minimize_dmf(p, N, "hf")
        lam = g_hf.occupations
        occ = max(occ, np.max(np.minimum(lam, 1 - lam)))
        hf_fci = min(hf_fci, e_hf - dmf.fci_energy(p, N))
        for _ in range(20):
            g = dmf.random_density_matrix(p.M, N, rng)
            mu_hf = max(mu_hf, dmf.muller_energy(g, p) - dmf.hf_energy(g, p))
            P = dmf.random_density_matrix(p.M, N, rng, projection=True)
            eq = max(eq, abs(dmf.muller_energy(P, p) - dmf.hf_energy(P, p)))
    dt = time.perf_counter() - t0
    ok = xd <= 1e-10 and occ <= 1e-6 and hf_fci >= -1e-9 and mu_hf <= 1e-10 and eq <= 1e-10 and dt < 120
    record(8, ok, f"X-D {xd:.1e}, HF occ dev {occ:.1e}, HF-FCI {hf_fci:.1e}, "
                  f"Mueller-HF {mu_hf:.1e}, projection {eq:.1e}, {dt:.1f} s")


def test_criterion_09_phase_space():
    gaps = []
    for Z in (1.0, 10.0):
        sol = tf.solve_tf_neutral(Z)
        pos, mom = ps.reduce_position(Z, tf=sol), ps.reduce_momentum(Z, tf=sol)
        gaps += [pos.relative_gap, mom.relative_gap]
        if Z == 1.0:
            englert = abs(mom.energy - tf.E_TF_ONE) / abs(tf.E_TF_ONE)
    record(9, max(gaps) < 0.02 and englert < 0.02,
           f"max reduction gap {max(gaps):.1e}, Englert at Z=1 off by {englert:.1e}")


def test_criterion_10_engel_dreizler():
    _, ttf, x = ed.ed_kernels(1e-3)
    coeff = max(abs(ttf / 1e-15 - 0.8) / 0.8, abs(x / 1e-12 - 2) / 2)
    g = nm.default_grid()
    rho = nm.RadialDensity(g, 2 * np.exp(-g.nodes**2) / np.pi**1.5)
    e = ed.ed_energy_terms(rho, ed.EdParams(2.0, 0.2, 1e6))
    ref = ed.nonrelativistic_terms(rho)
    lim = max(abs(e["kinetic"] / ref["kinetic"] - 1), abs(e["exchange"] / ref["exchange"] - 1))
    record(10, coeff < 1e-5 and lim < 1e-4, f"series coefficients {coeff:.1e}, c=1e6 limits {lim:.1e}")


def test_criterion_11_appendix():
    const = 0.0
    for al in (0.5, 1.0, 1.5):
        q = appendix.MaximalFunctionQuery(al, 3)
        v = [appendix.maximal_function_power(q, x) * x**al for x in (0.1, 1.0, 10.0)]
        const = max(const, (max(v) - min(v)) / np.mean(v))
    rng = np.random.default_rng(11)
    base = appendix.scaled_infimum(1.0, 1.0)
    law = max(abs(appendix.scaled_infimum(gm, Z) / (Z ** (13 / 9) * gm ** (-1 / 3) * base) - 1)
              for gm, Z in zip(rng.uniform(0.2, 5, 6), rng.uniform(0.5, 50, 6)))
    record(11, const < 1e-3 and law < 1e-3, f"maximal constancy {const:.1e}, scaling law {law:.1e}")


def test_criterion_12_determinism():
    times, outs, codes = [], [], []
    for _ in range(2):
        t0 = time.perf_counter()
        proc = cli("verify", "--suite", "all", "--seed", "7")
        times.append(time.perf_counter() - t0)
        outs.append(proc.stdout)
        codes.append(proc.returncode)
    same = outs[0] == outs[1] and len(outs[0]) > 0
    record(12, same and codes == [0, 0] and max(times) < 300,
           f"identical={same}, exit codes {codes}, runtimes {times[0]:.0f} s / {times[1]:.0f} s")
