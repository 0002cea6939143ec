import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergomix.diagnostics import (
    Partition,
    ball_averages,
    entropy_rate,
    h_minus_one,
    log_sobolev,
    log_sobolev_brute_force,
    maximal_ergodic,
    mixing_scale,
    nu_log_bound,
    partition_entropy,
)
from ergomix.errors import ConfigError, ErgomixError, UndersampledError
from ergomix.fields import VelocityFieldSpec, make_field
from ergomix.flow import time_one_map
from ergomix.maps import make_map
from ergomix.scalar import GridField, grid_nodes, make_initial, sample_scalar
from tests.test_lyapunov import IdentityMap


def _grid_from_function(func, resolution, sup_norm=1.0):
    nodes = grid_nodes(resolution)
    return GridField(
        resolution=resolution,
        values=func(nodes),
        time=0.0,
        metadata={"datum": {"sup_norm": sup_norm}},
    )


# --- h_minus_one -----------------------------------------------------------


def test_h_minus_one_single_mode():
    grid = _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]), 256)
    assert h_minus_one(grid) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-6)


def test_h_minus_one_second_mode():
    grid = _grid_from_function(lambda p: np.sin(4 * np.pi * p[..., 0]), 256)
    assert h_minus_one(grid) == pytest.approx(np.sqrt(0.5) / 2.0, abs=1e-6)


def test_h_minus_one_zero_and_mean_invariance():
    grid = _grid_from_function(lambda p: np.zeros(p.shape[:-1]), 64)
    assert h_minus_one(grid) == 0.0
    shifted = _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]) + 5.0, 64)
    unshifted = _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]), 64)
    assert h_minus_one(shifted) == pytest.approx(h_minus_one(unshifted), rel=1e-12)


def test_h_minus_one_is_absolutely_homogeneous():
    rng = np.random.default_rng(0)
    values = rng.normal(size=(64, 64))
    base = GridField(64, values, 0.0, {})
    scaled = GridField(64, -2.5 * values, 0.0, {})
    assert h_minus_one(scaled) == pytest.approx(2.5 * h_minus_one(base), rel=1e-12)


# --- log_sobolev -----------------------------------------------------------


def test_log_sobolev_constant_is_zero():
    grid = _grid_from_function(lambda p: np.ones(p.shape[:-1]), 64)
    assert log_sobolev(grid, 64, seed=0) == 0.0


def test_log_sobolev_quadratic_homogeneity():
    grid = _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]), 64)
    doubled = GridField(64, 2.0 * grid.values, 0.0, grid.metadata)
    a = log_sobolev(grid, 64, seed=3)
    b = log_sobolev(doubled, 64, seed=3)
    assert b == pytest.approx(4.0 * a, rel=1e-12)


@pytest.mark.parametrize(
    "make_grid",
    [
        lambda: _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]), 64),
        lambda: sample_scalar(
            make_field(VelocityFieldSpec(kind="zero")), make_initial("checkerboard", level=1), 0.0, 64
        ),
        lambda: sample_scalar(
            make_field(VelocityFieldSpec(kind="alternating_shear", amplitude=1.0)),
            make_initial("checkerboard", level=2),
            2.0,
            64,
            steps_per_unit=16,
        ),
    ],
    ids=["sinusoid", "checkerboard", "advected"],
)
def test_log_sobolev_matches_brute_force(make_grid):
    grid = make_grid()
    exact = log_sobolev_brute_force(grid)
    estimate = log_sobolev(grid, 256, seed=11)
    assert abs(estimate - exact) <= 0.05 * exact


def test_log_sobolev_rejects_few_samples():
    grid = _grid_from_function(lambda p: np.sin(2 * np.pi * p[..., 0]), 64)
    with pytest.raises(ConfigError):
        log_sobolev(grid, 16, seed=0)


# --- mixing_scale ----------------------------------------------------------


def _brute_force_mixing_scale(grid, kappa, radii):
    # independent direct scan: ball means via explicit offset sums
    n = grid.resolution
    sup = grid.metadata["datum"]["sup_norm"]
    ok = []
    for r in radii:
        reach = int(np.floor(r * n))
        total = np.zeros_like(grid.values)
        count = 0
        for di in range(-reach, reach + 1):
            for dj in range(-reach, reach + 1):
                if (di * di + dj * dj) / n**2 <= r * r:
                    total += np.roll(grid.values, (-di, -dj), axis=(0, 1))
                    count += 1
        ok.append(np.max(np.abs(total / count)) <= kappa * sup)
    last_fail = -1
    for i, good in enumerate(ok):
        if not good:
            last_fail = i
    if last_fail == len(radii) - 1:
        return radii[-1]
    if last_fail < 0:
        return radii[0]
    return radii[last_fail + 1]


def test_mixing_scale_checkerboard_bracket():
    grid = sample_scalar(
        make_field(VelocityFieldSpec(kind="zero")), make_initial("checkerboard", level=2), 0.0, 256
    )
    radii = [2 ** (-k) for k in range(6, 0, -1)]
    result = mixing_scale(grid, 1.0 / 3.0, radii)
    assert 2**-4 <= result <= 2**-2
    assert result == _brute_force_mixing_scale(grid, 1.0 / 3.0, sorted(radii))


def test_mixing_scale_stripe_bracket():
    grid = sample_scalar(
        make_field(VelocityFieldSpec(kind="zero")), make_initial("stripe", level=0), 0.0, 256
    )
    radii = sorted(0.4 / 2**k for k in range(7))
    result = mixing_scale(grid, 1.0 / 3.0, radii)
    assert result == _brute_force_mixing_scale(grid, 1.0 / 3.0, radii)
    assert 0.1 <= result <= 0.45


def test_mixing_scale_conventions():
    # fully uniform data mixes at every radius -> min(radii); an unmixed
    # half-half split fails at every radius -> max(radii)
    flat = _grid_from_function(lambda p: np.zeros(p.shape[:-1]), 64)
    radii = [0.05, 0.1, 0.2]
    assert mixing_scale(flat, 0.5, radii) == 0.05
    stripe = sample_scalar(
        make_field(VelocityFieldSpec(kind="zero")), make_initial("stripe", level=0), 0.0, 64
    )
    assert mixing_scale(stripe, 0.01, [0.01, 0.02]) == 0.02


def test_mixing_scale_monotone_in_kappa():
    grid = sample_scalar(
        make_field(VelocityFieldSpec(kind="alternating_shear", amplitude=1.0)),
        make_initial("checkerboard", level=2),
        2.0,
        128,
        steps_per_unit=16,
    )
    radii = sorted(0.4 / 2**k for k in range(7))
    results = [mixing_scale(grid, kappa, radii) for kappa in (0.15, 0.3, 0.5, 0.7)]
    assert all(a >= b for a, b in zip(results, results[1:]))


def test_mixing_scale_validation():
    grid = _grid_from_function(lambda p: np.zeros(p.shape[:-1]), 64)
    with pytest.raises(ConfigError):
        mixing_scale(grid, 1.5, [0.1])
    with pytest.raises(ConfigError):
        mixing_scale(grid, 0.3, [])
    with pytest.raises(ConfigError):
        mixing_scale(grid, 0.3, [0.7])


def test_ball_averages_match_direct_sum():
    rng = np.random.default_rng(5)
    grid = GridField(32, rng.normal(size=(32, 32)), 0.0, {})
    means = ball_averages(grid, 0.1)
    n, r = 32, 0.1
    total = np.zeros((32, 32))
    count = 0
    for di in range(-4, 5):
        for dj in range(-4, 5):
            if (di * di + dj * dj) / n**2 <= r * r:
                total += np.roll(grid.values, (-di, -dj), axis=(0, 1))
                count += 1
    assert np.max(np.abs(means - total / count)) < 1e-10


# --- partition entropy and entropy rate ------------------------------------


def test_partition_entropy_uniform():
    assert partition_entropy([0.25] * 4) == pytest.approx(np.log(4.0), rel=1e-12)


def test_partition_entropy_zero_convention():
    assert partition_entropy([1.0, 0.0, 0.0]) == 0.0


def test_partition_entropy_mixed():
    assert partition_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5 * np.log(2.0), rel=1e-12)


def test_partition_entropy_rejects_negative():
    with pytest.raises(ErgomixError):
        partition_entropy([0.5, 0.6, -0.1])
    with pytest.raises(ErgomixError):
        partition_entropy([0.5, 0.4])


@given(
    st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=8),
    st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=8),
)
@settings(max_examples=150, deadline=None)
def test_partition_entropy_subadditive_under_independent_join(a, b):
    p = np.array(a) / np.sum(a)
    q = np.array(b) / np.sum(b)
    joint = np.outer(p, q).ravel()
    joint = joint / joint.sum()
    assert partition_entropy(joint) <= partition_entropy(p) + partition_entropy(q) + 1e-12


def test_partition_labels_cover_all_cells():
    part = Partition(level=3)
    labels = part.labels(grid_nodes(32).reshape(-1, 2))
    assert set(np.unique(labels)) == set(range(part.cell_count))


def test_entropy_rate_identity_is_zero():
    # codes never refine, so the block entropies are flat and the rate is 0
    est, bias = entropy_rate(IdentityMap(), Partition(level=2), 8, 20_000, seed=0)
    assert est == pytest.approx(0.0, abs=1e-12)
    assert bias >= 0.0


def test_entropy_rate_cat_map_pesin_value():
    lam = np.log((3.0 + np.sqrt(5.0)) / 2.0)
    est, bias = entropy_rate(make_map("cat"), Partition(level=4), 8, 1_000_000, seed=1)
    assert abs(est - lam) <= 0.15 * lam


def test_entropy_rate_baker_map():
    est, bias = entropy_rate(make_map("baker"), Partition(level=4), 8, 200_000, seed=2)
    assert abs(est - np.log(2.0)) <= 0.15 * np.log(2.0)


def test_entropy_rate_undersampled_error_names_requirement():
    with pytest.raises(UndersampledError, match="samples"):
        entropy_rate(make_map("cat"), Partition(level=5), 8, 2_000, seed=3)


def test_entropy_rate_monotone_in_n():
    part = Partition(level=2)
    est4, bias4 = entropy_rate(make_map("cat"), part, 4, 400_000, seed=4)
    est8, bias8 = entropy_rate(make_map("cat"), part, 8, 400_000, seed=4)
    assert est8 <= est4 + bias4 + bias8 + 1e-9


# --- nu log bound ----------------------------------------------------------


def test_nu_log_bound_identity():
    assert nu_log_bound(IdentityMap(), Partition(level=3), 16, seed=0) == 0.0


def test_nu_log_bound_grid_aligned_translation():
    # constant field translating by exactly one cell width maps cube onto cube
    field = make_field(VelocityFieldSpec(kind="constant", amplitude=2**-4))
    mapping = time_one_map(field, steps=8)
    assert nu_log_bound(mapping, Partition(level=4), 16, seed=1) == 0.0


def test_nu_log_bound_dominates_entropy_rate_for_cat():
    est, bias = entropy_rate(make_map("cat"), Partition(level=5), 6, 600_000, seed=5)
    nu = nu_log_bound(make_map("cat"), Partition(level=5), 64, seed=6)
    assert nu >= est - 2.0 * bias


def test_nu_log_bound_validation():
    with pytest.raises(ConfigError):
        nu_log_bound(IdentityMap(), Partition(level=2), probes_per_cell=4, seed=0)


# --- maximal ergodic function ----------------------------------------------


def test_maximal_ergodic_constant_function():
    value = maximal_ergodic(make_map("cat"), lambda p: np.full(p.shape[:-1], 0.7), np.array([0.3, 0.4]), 32)
    assert value == pytest.approx(0.7, rel=1e-12)


def test_maximal_ergodic_identity_map():
    g = lambda p: np.abs(np.sin(2 * np.pi * p[..., 0]))
    x = np.array([0.2, 0.9])
    assert maximal_ergodic(IdentityMap(), g, x, 16) == pytest.approx(float(g(x)), rel=1e-12)


def test_maximal_ergodic_weak_l1_tail():
    # indicator of the quarter square: ||g||_1 = 1/4; empirical tails must
    # respect mu(g* > lam) <= 1/(4 lam)
    def g(points):
        return ((points[..., 0] < 0.5) & (points[..., 1] < 0.5)).astype(float)

    rng = np.random.default_rng(8)
    pts = rng.random((10_000, 2))
    star = maximal_ergodic(make_map("cat"), g, pts, 64)
    for lam in (0.3, 0.5, 0.8):
        assert np.mean(star > lam) <= 0.25 / lam


def test_maximal_ergodic_validation():
    with pytest.raises(ErgomixError):
        maximal_ergodic(IdentityMap(), lambda p: np.zeros(p.shape[:-1]), np.array([0.1, 0.1]), 0)
