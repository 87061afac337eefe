import math

import pytest

import steinlab


def test_presets_listed():
    names = steinlab.preset_names()
    assert "gaussian-hsi" in names
    assert "name: quartic" in steinlab.preset_yaml("quartic")


def test_gaussian_functionals():
    f = steinlab.gaussian_functionals(sigma2=2.0)
    assert f["H"] == pytest.approx(0.5 * (1 - math.log(2)), rel=1e-6)
    assert f["I"] == pytest.approx(0.5, rel=1e-6)
    assert f["S"] == pytest.approx(1.0, rel=1e-6)
    assert f["W2"] == pytest.approx(math.sqrt(2) - 1, rel=1e-6)


def test_flat_bound_below_lsi():
    P = {"K": 1.0, "hess_exact": True, "ric_exact": True}
    assert steinlab.hsi_bound(0.5, 1.0, P, "flat") == pytest.approx(0.5 * math.log1p(0.5))
    assert steinlab.hsi_bound(0.5, 1.0, P, "flat") < steinlab.lsi_bound(0.5, 1.0)
    assert steinlab.theta(math.e) == pytest.approx(2.0)


def test_run_preset_decodes_infinity():
    r = steinlab.run("preset:gaussian-shift")
    assert r["exit_code"] == 0
    assert math.isinf(r["functionals"]["S"]["value"])
    assert all(v["holds"] for v in r["verdicts"])


def test_errors_carry_codes():
    with pytest.raises(steinlab.SteinlabError) as e:
        steinlab.hsi_bound(0.5, 1.0, {"K": 1.0}, "flat")
    assert e.value.code == "HypothesisViolated"
    with pytest.raises(steinlab.SteinlabError):
        steinlab.run("name: x\nbogus: 1\n", inline_yaml=True)
