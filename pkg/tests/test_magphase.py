import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import annular_sector_nearest
from pocsfir import projectors as pj
from pocsfir.errors import InvalidArgumentError

A, DELTA, ALPHA, EPS = 1.0, 0.2, 0.6, 0.3


def project(x):
    return complex(pj.project_annular_sector(np.array([x]), A, DELTA, ALPHA, EPS)[0])


def region(x):
    return int(pj.classify_region(np.array([x]), A, DELTA, ALPHA, EPS)[0])


def test_dead_center_is_region_two():
    x = A * np.exp(1j * ALPHA)
    assert region(x) == 2
    assert project(x) == x


def test_magnitude_clamp_region_three():
    x = (A + 2 * DELTA) * np.exp(1j * ALPHA)
    assert region(x) == 3
    assert project(x) == pytest.approx((A + DELTA) * np.exp(1j * np.angle(x)), abs=1e-15)


def test_upper_ray_region_five():
    theta = ALPHA + 2 * EPS
    r = A / np.cos(theta - ALPHA - EPS)
    x = r * np.exp(1j * theta)
    rho = abs(x) * np.cos(np.angle(x) - ALPHA - EPS)
    assert A - DELTA < rho < A + DELTA
    assert region(x) == 5
    assert project(x) == pytest.approx(rho * np.exp(1j * (ALPHA + EPS)), abs=1e-15)


@pytest.mark.parametrize(
    "x, expected",
    [
        (0.5 * np.exp(1j * ALPHA), 1),
        (0.1 * np.exp(1j * (ALPHA + 1.0)), 4),
        (3.0 * np.exp(1j * (ALPHA + 0.5)), 6),
        (0.1 * np.exp(1j * (ALPHA - 1.0)), 7),
        (1.0 * np.exp(1j * (ALPHA - 0.4)), 8),
        (3.0 * np.exp(1j * (ALPHA - 0.5)), 9),
    ],
)
def test_other_regions(x, expected):
    assert region(x) == expected
    assert project(x) == pytest.approx(annular_sector_nearest(x, A, DELTA, ALPHA, EPS), abs=2e-3)


def membership_excess(z):
    z = np.asarray(z)
    mag = np.abs(z)
    dev = np.abs(np.angle(z * np.exp(-1j * ALPHA)))
    return np.maximum.reduce([
        (A - DELTA) - mag,
        mag - (A + DELTA),
        dev - EPS,
        np.zeros_like(mag),
    ])


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 4), st.floats(-np.pi, np.pi))
def test_regions_partition_plane(r, theta):
    x = np.array([r * np.exp(1j * theta)])
    masks = pj.region_masks(x, A, DELTA, ALPHA, EPS)
    assert masks.sum(axis=0).tolist() == [1]
    assert membership_excess(pj.project_annular_sector(x, A, DELTA, ALPHA, EPS))[0] <= 1e-9


def test_projection_matches_sampled_nearest_point(rng):
    for _ in range(200):
        x = rng.uniform(0, 3) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        oracle = annular_sector_nearest(x, A, DELTA, ALPHA, EPS)
        p = project(x)
        assert abs(x - p) <= abs(x - oracle) + 1e-12
        assert abs(p - oracle) <= 2e-3


def test_boundary_ties_agree():
    """On region boundaries both neighbouring formulas give the same point."""
    lo, hi = A - DELTA, A + DELTA
    up, dn = np.exp(1j * (ALPHA + EPS)), np.exp(1j * (ALPHA - EPS))
    formulas = {
        1: lambda x: lo * np.exp(1j * np.angle(x)),
        2: lambda x: x,
        3: lambda x: hi * np.exp(1j * np.angle(x)),
        4: lambda x: lo * up,
        5: lambda x: abs(x) * np.cos(np.angle(x) - ALPHA - EPS) * up,
        6: lambda x: hi * up,
        7: lambda x: lo * dn,
        8: lambda x: abs(x) * np.cos(ALPHA - EPS - np.angle(x)) * dn,
        9: lambda x: hi * dn,
    }
    cases = [
        (lo * np.exp(1j * ALPHA), (1, 2)),
        (hi * np.exp(1j * ALPHA), (2, 3)),
        (A * up, (2, 5)),
        (A * dn, (2, 8)),
        (lo * up, (1, 2, 4, 5)),
        (hi * dn, (2, 3, 8, 9)),
        (A * up + 0.3 * 1j * up, (5,)),
    ]
    for x, regions in cases:
        # these points sit on a boundary only up to rounding
        assert region(x) in regions
        values = [formulas[r](x) for r in regions]
        for v in values:
            assert v == pytest.approx(values[0], abs=1e-12)
        assert project(x) == pytest.approx(values[0], abs=1e-12)


def test_exact_ties_take_lower_region():
    # with alpha = 0 these boundary points are exactly representable
    lo, hi = A - DELTA, A + DELTA
    args = (A, DELTA, 0.0, EPS)
    xs = np.array([lo + 0j, hi + 0j])
    assert pj.classify_region(xs, *args).tolist() == [1, 2]
    np.testing.assert_array_equal(pj.project_annular_sector(xs, *args), xs)


def test_project_mag_phase_on_bins(rng):
    M = 64
    c = pj.MagPhaseConstraint([2 * np.pi * 5 / M, 2 * np.pi * 9 / M], [1.0, 0.5], 0.1, [0.3, -1.0], 0.2)
    g = rng.standard_normal(M)
    h = pj.project_mag_phase(g, c)
    G0, H = np.fft.rfft(g), np.fft.rfft(h)
    for k, a, ap in ((5, 1.0, 0.3), (9, 0.5, -1.0)):
        assert a - 0.1 - 1e-12 <= abs(H[k]) <= a + 0.1 + 1e-12
        assert abs(np.angle(H[k] * np.exp(-1j * ap))) <= 0.2 + 1e-12
    others = np.setdiff1d(np.arange(M // 2 + 1), [5, 9])
    np.testing.assert_allclose(H[others], G0[others], atol=1e-12)
    np.testing.assert_allclose(pj.project_mag_phase(h, c), h, atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(delta=0.0),
        dict(a=0.05),
        dict(epsilon=np.pi / 2),
        dict(omega=0.0),
    ],
)
def test_constraint_invariants(kwargs):
    base = dict(omega=0.5, a=1.0, delta=0.1, alpha_phase=0.0, epsilon=0.2)
    base.update(kwargs)
    with pytest.raises(InvalidArgumentError):
        pj.MagPhaseConstraint(**base)


def test_constraint_bin_collision():
    c = pj.MagPhaseConstraint([0.50, 0.501], 1.0, 0.1, 0.0, 0.2)
    with pytest.raises(InvalidArgumentError):
        c.bins(64)
