import json

import pytest

from smoothlab import verify
from smoothlab.errors import ConfigError

SMALL_MC = {"N": 256, "replicas": 16}


def test_report_invariant():
    rep = verify.CheckReport("x", True, -0.1, 0.2)
    assert rep.verdict == "pass"
    r = verify._report("y", -0.3, 0.2, {}, 5)
    assert not r.passed and r.verdict == "fail"
    assert verify._report("z", 1.0, 0.0, {}, 2).verdict == "too few points"


def test_tilt_shift_common_seed_at_zero_tilt():
    rep = verify.check_gaussian_tilt_shift({**SMALL_MC, "delta": 0.0, "common_seed": True}, seed=3)
    assert rep.margin == 0.0 and rep.passed


def test_tilt_shift_small_run():
    rep = verify.check_gaussian_tilt_shift(SMALL_MC, seed=3)
    assert rep.passed
    assert rep.details["exact_max_gap"] <= 1e-12


def test_tilt_shift_zero_sigma_fails():
    rep = verify.check_gaussian_tilt_shift(SMALL_MC, seed=3, sigma=0.0)
    assert not rep.passed


def test_sandwich_single_point():
    rep = verify.check_sandwich_exact({"betas": [0.0, 0.2], "deltas": [0.0, 0.15],
                                       "disorders": [{"kind": "TwoPoint", "params": {"a": 2.0}}]})
    assert rep.passed and rep.n_points == 2 * 3 * 3


def test_sandwich_beta_zero_is_tight():
    from smoothlab import disorder as dis

    for row in verify.sandwich_points(dis.two_point(2.0), [0.0], [0.1, -0.1], [0.0]):
        _, _, _, lo, mid, hi = row
        assert lo == pytest.approx(mid, abs=1e-15) and hi == pytest.approx(mid, abs=1e-15)


def test_ratio_growth_symmetric_skip():
    rep = verify.check_derivative_ratio_growth(1.0)
    assert rep.verdict == "symmetric" and rep.passed


@pytest.mark.parametrize("a", [2.0, 0.5])
def test_ratio_growth(a):
    rep = verify.check_derivative_ratio_growth(a)
    assert rep.passed and rep.n_points == 3
    assert all(g > 3.5 for g in rep.details["growth_per_halving"])


def test_shift_smoothing_nonpositive_t():
    rep = verify.check_shift_smoothing({**SMALL_MC, "t_values": [-0.1, -0.05, 0.0], "h_c": -0.09}, seed=1)
    assert rep.passed


def test_run_all_empty():
    assert verify.run_all({"names": []}) == []


def test_run_all_unknown_name():
    with pytest.raises(ConfigError):
        verify.run_all({"names": ["nope"]})


def test_run_all_captures_errors():
    reps = verify.run_all({"names": ["shift_smoothing"], "params": {"shift_smoothing": {"N": 1000}}})
    assert reps[0].verdict == "error" and not reps[0].passed
    assert "power of two" in reps[0].details["error"]


def test_run_all_deterministic():
    conf = {"names": ["derivative_ratio_growth", "invariants_toy", "gaussian_tilt_shift"], "seed": 5,
            "params": {"gaussian_tilt_shift": SMALL_MC}}
    a = verify.reports_json(verify.run_all(conf))
    b = verify.reports_json(verify.run_all(conf, workers=3))
    assert a == b
    assert [r["name"] for r in json.loads(a)] == conf["names"]


@pytest.mark.parametrize("name", ["invariants_disorder", "invariants_constants", "invariants_pinning",
                                  "invariants_toy", "invariants_rarestretch"])
def test_invariant_suites_pass(name):
    rep = verify.run_all({"names": [name], "seed": 1})[0]
    assert rep.passed, rep.details


def test_published_names_are_aliases():
    from smoothlab import rarestretch

    assert verify.check_tocheck_violation is verify.check_derivative_ratio_growth
    assert rarestretch.lemma_cg_bound is rarestretch.stretch_lower_bound
