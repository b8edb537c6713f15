import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamblers_ruin import build_distribution, count_roots_in_disk, find_disk_roots, find_z_star, poisson_prize
from gamblers_ruin.errors import NoInteriorRoot
from gamblers_ruin.payoff import evaluate_p, h_coefficients, p_derivative
from gamblers_ruin.rootfinder import aberth, sort_roots, winding_number

POISSON_ROOTS = np.array([0.993362, -0.202699 + 0.220049j, -0.202699 - 0.220049j])


def assert_same_set(a, b, tol):
    """Every element of ``a`` matches a distinct element of ``b``."""
    b = list(b)
    assert len(a) == len(b)
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        assert abs(x - b[j]) <= tol, (x, b[j])
        b.pop(j)


@pytest.mark.parametrize("table, expected", [({-1: 0.4, 1: 0.6}, 2 / 3), ({-1: 0.25, 1: 0.75}, 1 / 3)])
def test_z_star_two_point(table, expected):
    d = build_distribution(table)
    zs = find_z_star(d)
    assert zs == pytest.approx(expected, abs=1e-14)
    assert abs(evaluate_p(d, zs) - 1) <= 1e-12


def test_z_star_poisson(poisson):
    zs = find_z_star(poisson)
    assert zs == pytest.approx(0.993362, abs=1e-5)
    assert abs(evaluate_p(poisson, zs) - 1) <= 1e-12


@pytest.mark.parametrize("table", [{-1: 0.6, 1: 0.4}, {-1: 0.5, 1: 0.5}, {-2: 1.0}])
def test_z_star_requires_positive_drift(table):
    with pytest.raises(NoInteriorRoot):
        find_z_star(build_distribution(table))
    with pytest.raises(NoInteriorRoot):
        find_disk_roots(build_distribution(table))


def test_walk_root(walk):
    r = find_disk_roots(walk)
    assert r.nu == 1
    assert r.roots[0] == pytest.approx(2 / 3, abs=1e-14)
    assert not r.cluster_flags.any()


def test_poisson_roots(poisson):
    r = find_disk_roots(poisson)
    assert_same_set(r.roots, POISSON_ROOTS, 1e-5)
    # documented ordering: largest modulus first, then by argument
    assert r.roots[0].imag == 0
    assert r.roots[1].imag < 0 < r.roots[2].imag
    assert np.all(r.residuals <= 1e-9)
    assert r.distinct


def test_skala_roots_against_companion_solver(skala):
    # 0.3 + 0.7 z^3 = z^2, solved by numpy's companion matrix
    all_roots = np.roots([0.7, -1.0, 0.0, 0.3])
    inside = all_roots[np.abs(all_roots) < 1 - 1e-9]
    assert len(inside) == 2
    for eta in inside:
        assert abs(evaluate_p(skala, eta) - 1) < 1e-12
    r = find_disk_roots(skala)
    assert_same_set(r.roots, inside, 1e-12)
    s = np.sqrt(0.93)
    assert_same_set(r.roots, [(0.3 + s) / 1.4, (0.3 - s) / 1.4], 1e-14)


def test_invariants_on_suite(suite):
    for d, _ in suite:
        r = find_disk_roots(d)
        assert r.nu == d.nu
        assert np.all(np.abs(r.roots) <= r.z_star + 1e-9)
        assert np.min(np.abs(r.roots - r.z_star)) <= 1e-9
        assert np.all(r.residuals <= 1e-9)
        # conjugate symmetry
        key = lambda z: (round(z.real, 9), round(abs(z.imag), 9), z.imag)
        a = sorted(r.roots, key=key)
        b = sorted(np.conj(r.roots), key=key)
        np.testing.assert_allclose(np.sort_complex(np.array(a)), np.sort_complex(np.array(b)), atol=1e-9)


def test_winding_count_on_suite(suite, poisson):
    for d, _ in suite:
        assert count_roots_in_disk(d) == d.nu
    assert count_roots_in_disk(poisson) == 3


def test_winding_number_counts_zeros():
    # (z - 0.5)(z + 0.2)(z - 2): two zeros in the unit disk
    c = np.poly([0.5, -0.2, 2.0])[::-1]
    assert winding_number(c, radius=1.0) == 2
    assert winding_number(c, radius=3.0) == 3
    assert winding_number(c, center=2.0, radius=0.1) == 1


def test_aberth_matches_numpy():
    rng = np.random.default_rng(1)
    c = rng.normal(size=9)
    z0 = 1.2 * np.exp(2j * np.pi * (np.arange(8) + 0.25) / 8)
    z, ok = aberth(c, z0)
    assert ok
    assert_same_set(z, np.roots(c), 1e-10)


def test_sort_roots_order():
    z = np.array([0.1, -0.5 + 0.1j, 0.9, -0.5 - 0.1j])
    out = sort_roots(z)
    np.testing.assert_array_equal(out, [0.9, -0.5 - 0.1j, -0.5 + 0.1j, 0.1])


def test_doubling_degree_moves_simple_roots_little():
    d = build_distribution(poisson_prize(3, 0.01), tail_tol=1e-8)
    base = find_disk_roots(d)
    wide = find_disk_roots(d, degree=2 * d.degree)
    assert_same_set(wide.roots, base.roots, 10 * d.tail_mass_bound)


def test_near_double_root_is_flagged(near_double):
    r = find_disk_roots(near_double)
    assert r.nu == 3
    assert r.cluster_flags.sum() == 2
    assert not r.distinct
    assert r.min_separation < 1e-6
    assert np.all(r.residuals <= 1e-9)


def test_results_are_read_only(poisson):
    r = find_disk_roots(poisson)
    with pytest.raises(ValueError):
        r.roots[0] = 0.0


@st.composite
def favorable_tables(draw, max_nu=5, max_mu=6):
    nu = draw(st.integers(1, max_nu))
    mu = draw(st.integers(1, max_mu))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=nu + mu + 1, max_size=nu + mu + 1)))
    w /= w.sum()
    d = build_distribution({k - nu: float(x) for k, x in enumerate(w)})
    if d.mean < 0.05:
        # tilt toward the top prize until drift is comfortably positive
        w[-1] += 0.05 + abs(d.mean)
        w /= w.sum()
        d = build_distribution({k - nu: float(x) for k, x in enumerate(w)})
    return d


@settings(max_examples=60, deadline=None)
@given(favorable_tables())
def test_roots_property(d):
    if d.mean <= 1e-3:
        return
    r = find_disk_roots(d)
    assert r.nu == d.nu
    assert np.all(np.abs(r.roots) <= r.z_star + 1e-9)
    assert np.all(r.residuals <= np.maximum(1e-9, r.residual_floors))
    assert count_roots_in_disk(d) == d.nu
    # the polynomial z^nu - h(z) vanishes at each root
    g = -h_coefficients(d)
    g[d.nu] += 1
    vals = np.polynomial.polynomial.polyval(r.roots, g)
    assert np.all(np.abs(vals) <= 1e-9)


def test_root_near_pole_uses_rounding_floor():
    # a root at -0.0119 where |p'| is about 1e9: the double nearest the root
    # cannot have |p - 1| below 1e-9, but a Newton step from it is ~1e-18
    w = 0.06505800581964193
    d = build_distribution({-5: 0.0007623985056989288, -4: w, -3: w, -2: w, -1: w, 0: w, 1: 0.6739475723960915})
    r = find_disk_roots(d)
    j = int(np.argmin(np.abs(r.roots)))
    assert r.roots[j] == pytest.approx(-0.01185771, abs=1e-8)
    assert r.residuals[j] <= r.residual_floors[j]
    step = abs((evaluate_p(d, r.roots[j]) - 1) / p_derivative(d, r.roots[j]))
    assert step < 1e-15
    ref = np.roots((-h_coefficients(d) + np.eye(1, d.degree + 1, d.nu)[0])[::-1])
    assert np.min(np.abs(ref - r.roots[j])) < 1e-12
