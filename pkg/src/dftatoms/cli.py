"""dftatoms command-line front end.

Exit codes: 0 success, 1 solver error, 2 verification failure, 64 usage error.
Floats are written with 12 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import appendix, constraint_search as cs, dmf, engel_dreizler as ed, fockspace as fs
from . import numerics as nm, phasespace as ps, thomasfermi as tf, tfw, verify
from .errors import ContractError, InfeasibleError, SolverError

EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _clean(obj):
    """Round floats to 12 significant digits; non-finite values become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.12g}") if np.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _table(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _grid(spec: str | None) -> nm.RadialGrid:
    if spec in (None, "default"):
        return nm.default_grid()
    try:
        return nm.load_grid(spec)
    except OSError as exc:
        raise UsageError(f"cannot read grid {spec}: {exc.strerror}") from exc


def _density(path: str) -> nm.RadialDensity:
    return nm.RadialDensity.from_csv(_read(path))


def _line_density(path: str) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.DictReader(io.StringIO(_read(path))))
    try:
        return np.array([float(r["x"]) for r in rows]), np.array([float(r["rho"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: expected columns x,rho") from exc


def _channels(path: str) -> tfw.ChannelDensities:
    """CSV with columns r, rho_0, rho_1, ... (per dr)."""
    rows = list(csv.reader(io.StringIO(_read(path))))
    head, body = rows[0], np.array(rows[1:], dtype=float)
    if head[0] != "r" or len(head) < 2:
        raise UsageError(f"{path}: expected columns r,rho_0,...")
    return tfw.ChannelDensities(nm._grid_from_nodes(body[:, 0]), body[:, 1:].T)


def _problem(path: str) -> dmf.TwoBodyProblem:
    try:
        return dmf.TwoBodyProblem.from_dict(json.loads(_read(path)))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: malformed problem file ({exc})") from exc


# --- commands -----------------------------------------------------------------

def cmd_tf_solve(a):
    g = _grid(a.grid)
    sol = tf.solve_tf_neutral(a.z, g, a.tol) if a.n is None else tf.solve_tf_constrained(a.z, a.n, g, a.tol)
    if a.out == "csv":
        return _table(["r", "rho", "phi"], zip(sol.rho.grid.nodes, sol.rho.values, sol.phi))
    return dumps({"Z": sol.Z, "N": sol.N, "energy_hartree": sol.energy, "mass": sol.mass,
                  "residual": sol.residual, "mu": sol.mu, "saturated": sol.saturated,
                  "profile": sol.profile()})


def cmd_tfw_solve(a):
    s = tfw.minimize_tfw(a.z, a.z if a.n is None else a.n, a.lam, _grid(a.grid), a.tol)
    if a.out == "csv":
        return _table(["r", "rho"], zip(s.grid.nodes, s.psi**2))
    return dumps({"Z": s.Z, "N": s.N, "lambda": s.lam, "energy_hartree": s.energy, "mass": s.mass,
                  "mu": s.mu, "euler_residual": s.euler_residual, "bound": s.bound,
                  "outer_fraction": s.outer_fraction, "iterations": s.iterations})


def cmd_tfw_critical(a):
    lo, hi = tfw.critical_charge(a.z, a.lam, _grid(a.grid), a.tol)
    bound = a.z + tfw.EXCESS_CHARGE_CONSTANT * (a.lam / (2 * tf.GAMMA_TF)) ** 1.5
    return dumps({"Z": a.z, "lambda": a.lam, "n_lower": lo, "n_upper": hi, "excess_charge_bound": bound})


def cmd_hw_eval(a):
    ch = _channels(a.density)
    terms = tfw.hw_energy_terms(ch, a.z)
    return dumps({"Z": a.z, "energy_hartree": sum(terms.values()), "terms": terms,
                  "channel_masses": ch.masses()})


def cmd_macke_build(a):
    x, rho = _line_density(a.density)
    return cs.macke_orbitals_1d(x, rho, a.a).to_csv()


def cmd_macke_bound(a):
    x, rho = _line_density(a.density)
    a_opt, direct = cs.macke_kinetic_at_optimum(x, rho)
    _, N, _ = cs.line_cdf(x, rho)
    return dumps({"N": N, "bound": cs.kinetic_upper_bound_1d(x, rho), "direct_kinetic": direct,
                  "optimal_phase": a_opt})


def cmd_dmf_minimize(a):
    p = _problem(a.problem)
    g, e = dmf.minimize_dmf(p, a.n, a.functional, tol=a.tol, seed=a.seed)
    return dumps({"functional": a.functional, "N": a.n, "energy": e, "occupations": g.occupations,
                  "gamma": g.matrix.real})


def cmd_dmf_eval(a):
    p = _problem(a.problem)
    g = dmf.DensityMatrix(np.array(json.loads(_read(a.gamma)), dtype=float))
    return dumps({"trace": g.trace, "hf": dmf.hf_energy(g, p), "mueller": dmf.muller_energy(g, p),
                  "direct": dmf.direct_energy(g, p), "exchange": dmf.exchange_energy(g, p)})


def cmd_fock_fci(a):
    p = _problem(a.problem)
    e, _ = fs.ground_state(fs.assemble_hamiltonian(p.spec()), a.n)
    return dumps({"M": p.M, "N": a.n, "energy": e})


def cmd_fock_rdm(a):
    p = _problem(a.problem)
    e, psi = fs.ground_state(fs.assemble_hamiltonian(p.spec()), a.n)
    g = fs.reduced_density_matrix(psi, a.k)
    return dumps({"M": p.M, "N": a.n, "k": a.k, "energy": e, "trace": float(np.trace(g).real),
                  "rdm": g.real})


def cmd_ed_eval(a):
    terms = ed.ed_energy_terms(_density(a.density), ed.EdParams(a.z, a.lam, a.c))
    total = terms["weizsacker"] + terms["kinetic"] - terms["exchange"] + terms["nuclear"] + terms["hartree"]
    return dumps({"Z": a.z, "c": a.c, "lambda": a.lam, "energy_hartree": total, "terms": terms})


def cmd_ed_kernels(a):
    t = np.array(a.t, dtype=float) if a.t else np.geomspace(1e-3, 1e3, 61)
    f2, ttf, x = ed.ed_kernels(t)
    return _table(["t", "f2", "ttf", "x"], zip(t, f2, ttf, x))


def cmd_phase_reduce(a):
    fn = ps.reduce_position if a.mode == "position" else ps.reduce_momentum
    res = fn(a.z, _grid(a.grid), a.np)
    if a.out == "csv":
        pos, mom = res.f.marginals_csv()
        return pos if a.marginal == "position" else mom
    return dumps({"Z": res.Z, "mode": res.mode, "energy_hartree": res.energy, "tf_energy": res.tf_energy,
                  "phase_energy": res.phase_energy, "particle_number": res.particle_number,
                  "relative_gap": res.relative_gap})


def cmd_phase_englert(a):
    res = ps.reduce_momentum(a.z, _grid(a.grid), a.np)
    tau = ps.MomentumDensity(res.f.pgrid, res.f.tau)
    terms = ps.englert_energy_terms(tau, a.z)
    return dumps({"Z": a.z, "energy_hartree": sum(terms.values()), "terms": terms,
                  "tf_energy": res.tf_energy, "particle_number": tau.mass})


def cmd_appendix_maximal(a):
    q = appendix.MaximalFunctionQuery(a.alpha, a.d)
    m = appendix.maximal_function_power(q, a.x)
    return dumps({"alpha": a.alpha, "d": a.d, "x": a.x, "maximal": m, "constant": m * a.x**a.alpha})


def cmd_appendix_infimum(a):
    r = appendix.scaled_infimum_details(a.gamma, a.z, a.c)
    return dumps({"gamma": a.gamma, "Z": a.z, "C": a.c, "infimum": r.value, "mu": r.mu,
                  "support_radius": r.support_radius, "mass": r.mass})


def cmd_verify(a):
    try:
        report = verify.run_suite(a.suite, a.seed, a.timings)
    except KeyError as exc:
        raise UsageError(f"unknown suite {a.suite!r}") from exc
    return verify.report_json(report), (EXIT_VERIFY if report["summary"]["fail"] else EXIT_OK)


# --- parser -------------------------------------------------------------------

def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{x} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dftatoms", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name, fn, help_):
        q = group.add_parser(name, help=help_)
        q.set_defaults(fn=fn)
        q.add_argument("--output", "-o", help="write to this file instead of stdout")
        return q

    def family(name, help_):
        return sub.add_parser(name, help=help_).add_subparsers(dest="action", required=True,
                                                               parser_class=_Parser)

    grp = family("tf", "Thomas-Fermi atom")
    q = leaf(grp, "solve", cmd_tf_solve, "solve the TF equation")
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--n", type=_positive)
    q.add_argument("--grid", default="default")
    q.add_argument("--tol", type=_positive, default=1e-6)
    q.add_argument("--out", choices=["json", "csv"], default="json")

    grp = family("tfw", "Thomas-Fermi-Weizsäcker atom")
    q = leaf(grp, "solve", cmd_tfw_solve, "minimise at fixed electron number")
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--n", type=_positive)
    q.add_argument("--lambda", dest="lam", type=_positive, default=0.2)
    q.add_argument("--grid", default="default")
    q.add_argument("--tol", type=_positive, default=1e-8)
    q.add_argument("--out", choices=["json", "csv"], default="json")
    q = leaf(grp, "critical", cmd_tfw_critical, "bracket the critical electron number")
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--lambda", dest="lam", type=_positive, default=0.2)
    q.add_argument("--grid", default="default")
    q.add_argument("--tol", type=_positive, default=1e-3)

    grp = family("hw", "Hellmann-Weizsäcker channel functional")
    q = leaf(grp, "eval", cmd_hw_eval, "evaluate on channel densities (CSV r,rho_0,rho_1,...)")
    q.add_argument("--density", required=True)
    q.add_argument("--z", type=float, required=True)

    grp = family("macke", "Macke orbitals on a line")
    q = leaf(grp, "build", cmd_macke_build, "orbitals as CSV")
    q.add_argument("--density", required=True, help="CSV with columns x,rho")
    q.add_argument("--a", type=float, default=0.0, help="phase offset")
    q = leaf(grp, "bound", cmd_macke_bound, "kinetic bound against direct evaluation")
    q.add_argument("--density", required=True, help="CSV with columns x,rho")

    grp = family("dmf", "HF and Müller density-matrix functionals")
    q = leaf(grp, "minimize", cmd_dmf_minimize, "projected-gradient minimisation")
    q.add_argument("--problem", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--functional", choices=["hf", "mueller"], default="hf")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tol", type=_positive, default=1e-9)
    q = leaf(grp, "eval", cmd_dmf_eval, "evaluate a given γ (JSON matrix)")
    q.add_argument("--problem", required=True)
    q.add_argument("--gamma", required=True)

    grp = family("fock", "exact diagonalisation in Fock space")
    q = leaf(grp, "fci", cmd_fock_fci, "ground-state energy in the N sector")
    q.add_argument("--problem", required=True)
    q.add_argument("--n", type=int, required=True)
    q = leaf(grp, "rdm", cmd_fock_rdm, "reduced density matrix of the ground state")
    q.add_argument("--problem", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, choices=[1, 2], default=1)

    grp = family("ed", "Engel-Dreizler relativistic functional")
    q = leaf(grp, "eval", cmd_ed_eval, "evaluate on a radial density (CSV r,rho)")
    q.add_argument("--density", required=True)
    q.add_argument("--z", type=float, required=True)
    q.add_argument("--c", type=_positive, default=ed.SPEED_OF_LIGHT)
    q.add_argument("--lambda", dest="lam", type=_positive, default=1 / 9)
    q = leaf(grp, "kernels", cmd_ed_kernels, "tabulate f2, ttf, x")
    q.add_argument("--t", type=float, nargs="*")

    grp = family("phasespace", "phase-space functional and its reductions")
    q = leaf(grp, "reduce", cmd_phase_reduce, "reduce to position or momentum space")
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--mode", choices=["position", "momentum"], default="position")
    q.add_argument("--grid", default="default")
    q.add_argument("--np", type=int, default=1500, help="momentum shells")
    q.add_argument("--out", choices=["json", "csv"], default="json")
    q.add_argument("--marginal", choices=["position", "momentum"], default="position",
                   help="which marginal the CSV output holds")
    q = leaf(grp, "englert", cmd_phase_englert, "momentum functional on the TF momentum marginal")
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--grid", default="default")
    q.add_argument("--np", type=int, default=1500)

    grp = family("appendix", "power-law lemmas")
    q = leaf(grp, "maximal", cmd_appendix_maximal, "maximal function of |x|^-α")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--d", type=int, default=3)
    q.add_argument("--x", type=_positive, default=1.0)
    q = leaf(grp, "infimum", cmd_appendix_infimum, "scaled TF-type infimum")
    q.add_argument("--gamma", type=_positive, required=True)
    q.add_argument("--z", type=_positive, required=True)
    q.add_argument("--c", type=float, default=1.0)

    q = sub.add_parser("verify", help="run the property suite")
    q.set_defaults(fn=cmd_verify)
    q.add_argument("--suite", default="all", help="all, acceptance, a module prefix or a check name")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--timings", action="store_true", help="record wall-clock runtime_ms")
    q.add_argument("--output", "-o")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = args.fn(args)
    except UsageError as exc:
        print(f"dftatoms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ContractError, InfeasibleError, ValueError) as exc:
        print(f"dftatoms: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"dftatoms: solver error: {exc} {_clean(exc.diagnostics)}", file=sys.stderr)
        return EXIT_SOLVER
    text, code = out if isinstance(out, tuple) else (out, EXIT_OK)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
