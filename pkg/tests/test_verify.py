import json
import warnings

import numpy as np
import pytest

from lipext.boundary import load_boundary
from lipext.extension import lipschitz_constant_boundary, mcshane_extension, whitney_extension
from lipext.grid import interval, square
from lipext.scheme import SchemeConfig, residual_from_extrema, solve
from lipext.verify import (
    CriticalPointWarning,
    TestPolynomial,
    VerificationReport,
    bundled_polynomials,
    check_sandwich,
    check_theorem1,
    check_theorem2,
    consistency_study,
    continuous_operator,
    inf_laplacian,
    monotonicity_property_test,
    normalized_inf_laplacian,
    run_consistency_suite,
)

ORIGIN = (0.0, 0.0)
ZERO_H = ((0.0, 0.0), (0.0, 0.0))


def poly(g, H, c=0.0, anchor=ORIGIN):
    return TestPolynomial(c, tuple(g), tuple(map(tuple, H)), tuple(anchor))


def test_continuous_operator_examples():
    phi = poly((1, 0), ((1, 0), (0, 1)))
    assert inf_laplacian(phi) == 1.0
    assert continuous_operator(phi, lam=0, form="min") == -1.0
    assert continuous_operator(poly((0, 0), ((3, 1), (1, 2))), lam=2.0, form="min") == -2.0
    cone = poly((2.0, 0.0), ZERO_H)
    assert continuous_operator(cone, lam=2.0, form="min") == 0.0
    assert continuous_operator(cone, lam=2.0, form="max") == 0.0
    with pytest.raises(ValueError):
        continuous_operator(phi, form="sum")


def test_polynomial_rejects_asymmetric_hessian():
    with pytest.raises(ValueError):
        poly((1, 0), ((1, 2), (0, 1)))


def test_normalized_examples():
    assert normalized_inf_laplacian(poly((2, 0), ((1, 0), (0, 1)))) == 1.0
    assert normalized_inf_laplacian(poly((1, 1), ((1, 0), (0, -1)))) == 0.0
    assert normalized_inf_laplacian(poly((1, 0), ((2, 0), (0, 5)))) == 2.0


def test_normalized_critical_point_is_flagged():
    with pytest.warns(CriticalPointWarning):
        v = normalized_inf_laplacian(poly((0, 0), ((1, 0), (0, -3))))
    assert v == -3.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert normalized_inf_laplacian(poly((0, 0), ZERO_H)) == 0.0


def _fd_operator(phi, lam, form, h=1e-4):
    x = np.asarray(phi.anchor, dtype=float)
    e = np.eye(2)
    g = np.array([(phi(x + h * e[k]) - phi(x - h * e[k])) / (2 * h) for k in range(2)])
    H = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            H[a, b] = (phi(x + h * e[a] + h * e[b]) - phi(x + h * e[a] - h * e[b])
                       - phi(x - h * e[a] + h * e[b]) + phi(x - h * e[a] - h * e[b])) / (4 * h * h)
    lap = g @ H @ g
    ng = np.linalg.norm(g)
    return {"min": min(ng - lam, -lap), "max": max(lam - ng, -lap), "inf": -lap}[form]


def test_operator_agrees_with_central_differences():
    rng = np.random.default_rng(7)
    for _ in range(50):
        A = rng.normal(size=(2, 2))
        phi = poly(rng.normal(size=2), (A + A.T) / 2, anchor=rng.uniform(size=2))
        lam = float(rng.uniform(0, 3))
        for form in ("min", "max", "inf"):
            assert abs(continuous_operator(phi, lam=lam, form=form) - _fd_operator(phi, lam, form)) <= 1e-8


def test_normalized_vs_unnormalized_scale():
    rng = np.random.default_rng(8)
    for _ in range(100):
        A = rng.normal(size=(2, 2))
        phi = poly(rng.normal(size=2), (A + A.T) / 2)
        un, nn = inf_laplacian(phi), normalized_inf_laplacian(phi)
        g2 = float(np.dot(phi.g, phi.g))
        assert np.sign(un) == np.sign(nn)
        assert un == pytest.approx(g2 * nn, rel=1e-14, abs=1e-15)


def test_consistency_linear_min_form():
    phi = bundled_polynomials()[0]
    rep = consistency_study(phi, 1.0, "min", (0.2, 0.1, 0.05, 0.025))
    assert rep.continuous == 0.0
    assert rep.decreasing and rep.order >= 0.8
    assert np.all(rep.errors <= 1.0 * (rep.eps + rep.h / rep.eps))


def test_consistency_paraboloid_targets_normalized_operator():
    # phi = |x - x0|^2 / 2 seen at offset delta: g = delta e1, H = I
    delta = 0.5
    phi = poly((delta, 0), ((1, 0), (0, 1)), c=delta**2 / 2, anchor=(0.5, 0.5))
    rep = consistency_study(phi, 0.0, "inf", (0.2, 0.1, 0.05, 0.025))
    assert rep.continuous == -1.0
    assert rep.decreasing
    # the unnormalized value -delta^2 is not the limit of the ball scheme
    assert abs(rep.discrete[-1] - (-delta**2)) > 0.5
    assert abs(rep.discrete[-1] - (-1.0)) <= 0.1


def test_consistency_constant_is_exact():
    phi = bundled_polynomials()[-1]
    rep = consistency_study(phi, 0.0, "inf", (0.2, 0.1, 0.05))
    np.testing.assert_array_equal(rep.discrete, 0.0)
    assert rep.exact and rep.order == float("inf")


def test_consistency_quadratic_three_level_ladder():
    polys = {p.name: p for p in bundled_polynomials()}
    cases = [("shallow", f) for f in ("min", "max", "inf")] + [("saddle", "max"), ("tilted", "max")]
    for name, form in cases:
        rep = consistency_study(polys[name], 1.0, form, (0.2, 0.1, 0.05))
        assert not rep.exact
        assert rep.decreasing and rep.non_monotone_steps == 0


def test_consistency_rejects_bad_ladders():
    phi = bundled_polynomials()[0]
    with pytest.raises(ValueError):
        consistency_study(phi, 1.0, "min", (0.1, 0.2))
    with pytest.raises(ValueError):
        consistency_study(phi, 1.0, "min", (0.6, 0.3))


def test_consistency_suite_orders():
    for rep in run_consistency_suite():
        if rep.exact:
            continue
        assert rep.decreasing, rep.name
        assert rep.order >= 0.8, (rep.name, rep.form, rep.lam, rep.order)


def test_theorem1_interval_critical():
    d = interval(101)
    rep = check_theorem1(d, np.array([0.0, 1.0]), 1.0)
    assert rep.passed, rep.failures()


def test_theorem1_square_distance():
    d = square(51)
    rep = check_theorem1(d, np.zeros(d.boundary.size), 2.0)
    assert rep.passed, rep.failures()
    assert rep["mcshane_vs_jensen-min"].measured <= 2 * 2.0 * 3 * d.h


def test_theorem1_interval_subcritical_gap():
    d = interval(101)
    rep = check_theorem1(d, np.array([0.0, 1.0]), 0.5)
    assert rep.passed, rep.failures()
    assert rep["boundary_gap"].measured == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("data", ["sine:1", "cone:0.5,0.5", "xy"])
def test_theorem1_square_subcritical(data):
    d = square(51)
    F = load_boundary(data, d)
    rep = check_theorem1(d, F, lipschitz_constant_boundary(F, d) / 2)
    assert rep.passed, rep.failures()


def test_theorem2_midpoint_and_mcshane():
    d = square(51)
    F = load_boundary("sine:1", d)
    lam = lipschitz_constant_boundary(F, d)
    up, lo = mcshane_extension(d, F, lam), whitney_extension(d, F, lam)
    rep = check_theorem2(d, F, 0.5 * (up + lo), lam)
    assert rep.passed, rep.failures()
    rep = check_theorem2(d, F, up, lam)
    assert rep.passed, rep.failures()


def test_theorem2_constant_is_exact():
    d = square(21)
    F = np.full(d.boundary.size, 3.0)
    u = np.full(d.shape, 3.0)
    rep = check_theorem2(d, F, u, 0.0)
    assert rep["jensen_min_subsolution"].measured == 0.0
    assert rep["jensen_max_supersolution"].measured == 0.0


def test_theorem2_flags_boundary_mismatch():
    d = interval(11)
    F = np.array([0.0, 1.0])
    u = d.coords[:, 0] + 0.1
    rep = check_theorem2(d, F, u, 1.0)
    assert not rep["precondition_boundary_match"].passed


def test_sandwich_examples():
    d = interval(101)
    F = np.array([0.0, 1.0])
    up, lo = mcshane_extension(d, F, 1.0), whitney_extension(d, F, 1.0)
    assert check_sandwich(lo, lo, up, 1e-12).passed
    bad = check_sandwich(up, lo - 1, lo, 1e-12)
    assert not bad.passed
    c = bad["lower_le_mid"]
    assert c.measured == pytest.approx(1.0) and c.witness_node is not None
    with pytest.raises(ValueError):
        check_sandwich(lo, lo[:-1], up, 0.0)


def test_sandwich_amle_within_scheme_tolerance():
    d = square(51)
    F = load_boundary("sine:1", d)
    lam = lipschitz_constant_boundary(F, d)
    u, rep = solve(d, F, SchemeConfig("inf-harmonic", lam=lam))
    tol = 10 * 1e-9 * rep.eps**2 + 0.5 * lam * rep.eps
    assert check_sandwich(whitney_extension(d, F, lam), u, mcshane_extension(d, F, lam), tol).passed


def test_monotonicity_suite_passes():
    rep = monotonicity_property_test(0, 1000)
    assert rep.passed
    assert [c.name for c in rep.checks] == ["ellipticity_min_violations", "ellipticity_max_violations",
                                            "ellipticity_inf_violations"]
    with pytest.raises(ValueError):
        monotonicity_property_test(0, 0)


def test_monotonicity_equal_fields_give_equal_residuals():
    rng = np.random.default_rng(3)
    u = rng.normal(size=8)
    for eq in ("jensen-min", "jensen-max", "inf-harmonic"):
        a = residual_from_extrema(eq, 0.1, u.min(), u.max(), 1.0, 0.3)
        b = residual_from_extrema(eq, 0.1, u.copy().min(), u.copy().max(), 1.0, 0.3)
        assert a == b


def test_single_neighbour_bump_on_unique_max():
    eps = 0.25
    nbrs = np.array([0.0, 0.3, 1.0])  # unique max at the last neighbour
    center = 0.5
    bumped = nbrs + np.array([0.0, 0.0, 1.0])
    r0 = residual_from_extrema("inf-harmonic", center, nbrs.min(), nbrs.max(), 0, eps)
    r1 = residual_from_extrema("inf-harmonic", center, bumped.min(), bumped.max(), 0, eps)
    # M grows by one, so (2u - M - m)/eps^2 drops by 1/eps^2; the midpoint update rises by 1/2
    assert r0 - r1 == pytest.approx(1 / eps**2, rel=1e-14)
    assert (bumped.min() + bumped.max()) / 2 - (nbrs.min() + nbrs.max()) / 2 == 0.5


def test_report_json_shape():
    rep = VerificationReport()
    rep.add("a", 0.5, 1.0)
    rep.add("b", 2.0, 1.0, witness=(1, 2))
    rep.add("gap", 0.5, 1e-12, sense=">=")
    data = json.loads(rep.to_json())
    assert [d["pass"] for d in data] == [True, False, True]
    assert data[1]["witness_node"] == [1, 2] and "witness_node" not in data[0]
    assert not rep.passed and [c.name for c in rep.failures()] == ["b"]
