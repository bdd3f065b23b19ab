import math

import numpy as np
import pytest

from reebtwist import profiles as P


def test_g_at_zero_is_k_pi(tp):
    assert abs(tp.g(0.0) - (-math.pi)) <= 1e-12
    tpp = P.build_twist_profile(k=1, eps=0.1, p_plateau=0.5)
    assert abs(tpp.g(0.0) - math.pi) <= 1e-12
    assert abs(tp.f(0.0)) <= 1e-12


def test_left_twist_has_unique_polished_zero(tp):
    assert tp.p0 is not None
    assert 0.0 < tp.p0 < tp.p_plateau + 1e-6
    assert abs(tp.g(tp.p0)) <= 1e-12
    assert tp.g.d1(tp.p0) > 0.0
    # exactly one sign change on a dense grid
    vals = np.array([tp.g(s) for s in np.linspace(1e-9, tp.s_max, 4001)])
    assert int(np.sum(np.diff(np.sign(vals)) != 0)) == 1


def test_right_twist_has_no_zero():
    tpp = P.build_twist_profile(k=1, eps=0.1, p_plateau=0.5)
    assert tpp.p0 is None
    vals = [tpp.g(s) for s in np.linspace(0.0, 1.0, 2001)]
    assert min(vals) > 0.0


def test_degenerate_and_invalid_inputs_rejected():
    with pytest.raises(P.ProfileError):
        P.build_twist_profile(k=-1, eps=0.0, p_plateau=0.5)
    with pytest.raises(P.ProfileError):
        P.build_twist_profile(k=0, eps=0.1, p_plateau=0.5)
    with pytest.raises(P.ProfileError):
        P.build_twist_profile(k=-1, eps=0.1, p_plateau=1.5)


def test_non_monotone_ramp_rejected(monkeypatch):
    def bad_ramp():
        c, c1, c2, Cint = P.TWIST_SHAPES["cos2"]()
        return (lambda x: c(x) + 0.1 * math.sin(2 * math.pi * x),
                lambda x: c1(x) + 0.2 * math.pi * math.cos(2 * math.pi * x),
                c2, Cint)

    monkeypatch.setitem(P.TWIST_SHAPES, "bad", bad_ramp)
    with pytest.raises(P.ProfileError, match="monotone"):
        P.build_twist_profile(k=-1, eps=0.1, p_plateau=0.5, shape="bad")


def test_hk_primitive_identities(tp):
    assert abs(tp.hk(0.0) - 1.0) <= 1e-15
    ss = np.linspace(0.0, 1.0, 201)
    assert min(tp.hk(s) for s in ss) > 0.0
    # hk'(s) = s g'(s): differentiate the defining integral
    for s in np.linspace(0.01, 0.99, 37):
        fd = (tp.hk(s + 1e-6) - tp.hk(s - 1e-6)) / 2e-6
        assert abs(fd - s * tp.g.d1(s)) <= 1e-8 * max(1.0, abs(s * tp.g.d1(s)))


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5983, 0.75, 0.9, 1.0])
def test_primitives_match_quadrature_oracle(tp, s):
    assert abs(tp.hk(s) - tp.hk_by_quadrature(s)) <= 1e-10
    assert abs(tp.htilde(s) - tp.htilde_by_quadrature(s)) <= 1e-10


def test_derivative_fd_self_consistency(tp, bp):
    rng = np.random.default_rng(0)
    for prof in (tp.g, tp.hk, tp.htilde, bp.h1, bp.h2):
        assert prof.check_derivative_consistency(rng=rng) <= 1e-6


def test_quadratic_core_oracle():
    # hand-differentiated: h1 = 1 - r^2, h2 = r^2 gives detH = 2r exactly
    h1 = P.SmoothProfile(0.0, 1.0, lambda r: 1 - r * r, lambda r: -2 * r,
                         lambda r: -2.0)
    h2 = P.SmoothProfile(0.0, 1.0, lambda r: r * r, lambda r: 2 * r,
                         lambda r: 2.0)
    for r in np.linspace(0.01, 0.99, 99):
        det = h1(r) * h2.d1(r) - h2(r) * h1.d1(r)
        assert abs(det - 2.0 * r) <= 1e-15
        assert abs(det / r - 2.0) <= 1e-13


def test_proportional_profiles_rejected():
    f = P.SmoothProfile(0.0, 1.0, lambda r: 1 + r * r, lambda r: 2 * r,
                        lambda r: 2.0)
    with pytest.raises(P.ProfileError, match="contact condition"):
        P.build_binding_profile(0.5, 1.0, {"name": "custom", "h1": f, "h2": f})


def test_default_contact_bound(bp):
    mn, _at = bp.min_detH_over_r(10_000)
    assert mn >= 0.5


def test_default_shape_invariants(tp, bp):
    assert bp.quadratic_core
    # exact core values
    for r in np.linspace(0.0, bp.core_end, 20):
        assert abs(bp.h1(r) - (1 - r * r)) <= 1e-15
        assert abs(bp.h2(r) - r * r) <= 1e-15
    assert abs(bp.h2.d1(bp.r0)) <= 1e-12
    rs = np.linspace(1e-4, bp.r_max, 3000)
    assert max(bp.h2(r) for r in rs) <= bp.h2(bp.r0) + 1e-12
    assert min(abs(bp.h1(r)) for r in rs) > 0.0
    # the peak carries the principal action
    assert abs(2 * math.pi * bp.h2(bp.r0) - tp.hk(tp.p0)) <= 1e-12


def test_root_stability_under_shape_perturbation(tp):
    tp2 = P.build_twist_profile(k=-1, eps=tp.eps + 1e-6,
                                p_plateau=tp.p_plateau, shape=tp.shape)
    assert abs(tp2.p0 - tp.p0) <= 1e-4
    tp3 = P.build_twist_profile(k=-1, eps=tp.eps,
                                p_plateau=tp.p_plateau + 1e-6, shape=tp.shape)
    assert abs(tp3.p0 - tp.p0) <= 1e-4


def test_pullback_on_matched_collar(tp, matched):
    rep = P.pullback_consistency_check(tp, matched, matched.collar)
    assert rep.passed
    assert rep.max_mismatch <= 1e-8
    assert rep.phi_period_scale == pytest.approx(2 * math.pi)


def test_pullback_off_collar_reports_failure(tp, matched):
    rep = P.pullback_consistency_check(tp, matched, (1.0, 1.2))
    assert not rep.passed
    assert rep.max_mismatch > 1e-3
    assert 1.0 <= rep.worst_radius <= 1.2


def test_pullback_single_point_collar(tp, matched):
    r = matched.collar[0] + 0.1
    rep = P.pullback_consistency_check(tp, matched, (r, r))
    assert rep.n_samples == 1


def test_matched_profile_structure(tp, matched):
    assert not matched.quadratic_core
    assert abs(matched.r0 - 1.0 / tp.p0) <= 1e-12
    assert abs(matched.h2.d1(matched.r0)) <= 1e-12
    mn, _ = matched.min_detH_over_r(10_000)
    assert mn > 0.0
    # collar formulas hold exactly
    r = 0.5 * (matched.collar[0] + matched.collar[1])
    assert matched.h1(r) == pytest.approx(1.0 / r, abs=1e-14)
    assert matched.h2(r) == pytest.approx(
        tp.htilde(1.0 / r) / (2 * math.pi), abs=1e-14)


def test_dump_tables(tp, bp):
    h, rows = P.twist_table(tp, n=16)
    assert h == ["x", "g", "g_prime", "h_k", "h_tilde_k"]
    assert len(rows) == 16
    h, rows = P.binding_table(bp, n=16)
    assert h == ["r", "h1", "h1_prime", "h2", "h2_prime", "detH"]
    assert all(np.isfinite(rows[-1]))
