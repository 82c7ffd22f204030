"""Smoke tests for the python bindings."""

import numpy as np
import pytest

import vibratrak as vt

DUFFING = {"kind": "stiffening_duffing", "alpha": 1.0}
JENKINS = {"kind": "jenkins", "k_t": 0.25, "F_s": 0.2}
IWAN = {"kind": "iwan", "k_t": 0.25, "F_s": 0.2, "chi": -0.5, "beta": 0.0}


def test_version():
    assert vt.__version__


def test_model_basics():
    assert vt.linearized_stiffness(JENKINS) == pytest.approx(0.25)
    assert vt.phi_max(0.2, 0.25, -0.5, 0.0) == pytest.approx(2.4)
    f, dfdx, _ = vt.eval_instantaneous(DUFFING, 2.0, 0.0)
    assert f == pytest.approx(8.0)
    assert dfdx == pytest.approx(12.0)


def test_scales_match_reference_table():
    sys = vt.SystemConfig(m=1.0, c=0.01, k=0.75, force=IWAN, H=3)
    sc = vt.nondimensionalize(sys)
    assert sc.zeta0 == pytest.approx(0.005)
    assert sc.F_s_hat == pytest.approx(0.083333, rel=1e-4)


def test_aft_duffing_third_harmonic():
    X = np.zeros(7)
    X[1] = 1.0
    r = vt.aft(DUFFING, X, 1.0, 1024)
    assert r.F[1] == pytest.approx(0.75)
    assert r.F[5] == pytest.approx(0.25)


def test_fast_aft_matches_standard():
    rng = np.random.default_rng(0)
    for force in (JENKINS, IWAN):
        X = rng.standard_normal(7)
        a = vt.aft(force, X, 1.0, 1024)
        b = vt.aft_fast_hysteretic(force, X, 1.0, 1024)
        assert np.max(np.abs(a.F - b.F)) <= 1e-12
        assert np.max(np.abs(a.dF_dX - b.dF_dX)) <= 1e-12


def test_solve_and_track():
    sys = vt.SystemConfig(m=1.0, c=0.01, k=1.0, force=DUFFING, H=5)
    X = vt.solve_hbm(sys, np.zeros(11), 0.4, 1.0)
    assert vt.hbm_residual_norm(sys, X, 0.4, 1.0) <= 1e-9

    br = vt.compute_frc(sys, 1.0, 0.4, 0.6, ds0=0.005, ds_max=0.02)
    assert len(br.points) > 20
    peaks = vt.extract_superharmonic_peaks(sys, br, 3)
    assert peaks
    best = max(peaks, key=lambda p: p.Xn_peak)
    assert best.omega_peak == pytest.approx(0.494, abs=0.01)

    bb = vt.vprnm_backbone(sys, 3, 0.1, 2.0)
    assert len(bb) > 5
    assert abs(bb[0].phi_n - (-np.pi / 2)) < 0.05
    assert max(abs(p.constraint_residual) for p in bb) <= 1e-9


def test_decomposition_identity():
    sys = vt.SystemConfig(m=1.0, c=0.01, k=0.75, force=JENKINS, H=5)
    rng = np.random.default_rng(1)
    X = rng.standard_normal(11)
    assert vt.decomposition_check(sys, X, 0.31, 3) <= 1e-10
