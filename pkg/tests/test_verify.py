import json

import numpy as np
import pytest

from dftatoms import verify


def test_registry_names_unique_and_cover_modules():
    names = [c.name for c in verify.REGISTRY]
    assert len(names) == len(set(names))
    prefixes = {n.split(".")[0] for n in names}
    assert prefixes == {"numerics", "fock", "tf", "tfw", "macke", "dmf", "ed", "phase", "appendix"}
    assert all(c.anchor for c in verify.REGISTRY)


def test_observational_checks_are_the_open_questions():
    obs = {c.name for c in verify.REGISTRY if c.observational}
    assert obs == {"tf.lieb_thirring_ratio", "dmf.muller_below_fci", "ed.boundedness_scan",
                   "macke.plane_kinetic_excess"}


def test_acceptance_selection_covers_criteria_one_to_eleven():
    covered = {k for c in verify.select("acceptance") for k in c.criteria}
    assert covered == set(range(1, 12))


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.select("nothing")


def test_rounding():
    assert verify._round(1 / 3) == 0.333333333333
    assert verify._round(float("nan")) is None


def test_run_check_is_deterministic():
    c = next(c for c in verify.REGISTRY if c.name == "numerics.onsager_positive")
    a, b = verify.run_check(c, 11), verify.run_check(c, 11)
    assert a == b and a["status"] == "pass"
    assert verify.run_check(c, 12)["measured"] != a["measured"]


def test_report_structure():
    rep = verify.run_suite("numerics", seed=1)
    text = verify.report_json(rep)
    d = json.loads(text)
    assert d["schema"] == 1
    assert [r["name"] for r in d["records"]] == sorted(r["name"] for r in d["records"])
    for r in d["records"]:
        assert set(r) >= {"name", "paper_anchor", "status", "measured", "expected", "tolerance", "runtime_ms"}


def test_observational_failure_does_not_fail(monkeypatch):
    c = verify.Check("x.obs", "anchor", lambda rng: verify.Outcome(-1.0, 0.0, 0.0, False), True)
    assert verify.run_check(c, 0)["status"] == "observational"
    c = verify.Check("x.hard", "anchor", lambda rng: verify.Outcome(-1.0, 0.0, 0.0, False))
    assert verify.run_check(c, 0)["status"] == "fail"
