"""Mixing and entropy diagnostics for grid scalars and torus maps.

Fourier convention: rho_hat(k) = integral of rho(x) exp(-2 pi i k.x) dx,
realized on the grid as fft2(values) / N^2.  The homogeneous H^-1 norm is
sqrt(sum over k != 0 of |k|^-2 |rho_hat(k)|^2); with this convention
sin(2 pi x) has norm 1/sqrt(2).
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError, ErgomixError, UndersampledError
from .scalar import GridField
from .torus import uniform_points

# Undersampling guard for plug-in entropies.  The plug-in bias is reported
# separately; below 1.5 samples per observed code the estimate is hopeless.
ENTROPY_GUARD_FACTOR = 1.5

LOG_SOBOLEV_OUTER_RADIUS = 0.2  # offsets integrate over the ball of radius 1/5


@dataclass(frozen=True)
class Partition:
    """Dyadic-cube partition of the torus: 4^level open cubes of side 2^-level."""

    level: int

    @property
    def cell_count(self) -> int:
        return 4**self.level

    def labels(self, points):
        """Index of the cube containing each point (row-major over axes)."""
        points = np.asarray(points, dtype=float)
        side = 2**self.level
        ix = np.floor(points[..., 0] * side).astype(np.int64)
        iy = np.floor(points[..., 1] * side).astype(np.int64)
        return ix * side + iy


@dataclass
class DiagnosticSeries:
    """Per-time diagnostics of one transported scalar."""

    times: list = dataclass_field(default_factory=list)
    h_minus_one: list = dataclass_field(default_factory=list)
    log_sobolev: list = dataclass_field(default_factory=list)
    mixing_scale: list = dataclass_field(default_factory=list)
    metadata: dict = dataclass_field(default_factory=dict)

    def append(self, t, h1, lsq, mix):
        self.times.append(float(t))
        self.h_minus_one.append(float(h1))
        self.log_sobolev.append(float(lsq))
        self.mixing_scale.append(float(mix))


def h_minus_one(grid: GridField) -> float:
    """Homogeneous H^-1 norm of the (mean-subtracted) grid scalar."""
    n = grid.resolution
    coeffs = np.fft.fft2(grid.values) / n**2
    k = np.fft.fftfreq(n, d=1.0 / n)
    k2 = k[:, None] ** 2 + k[None, :] ** 2
    k2[0, 0] = 1.0  # k = 0 excluded below
    weight = np.abs(coeffs) ** 2 / k2
    weight[0, 0] = 0.0
    return float(np.sqrt(np.sum(weight)))


def _shell_edges(resolution):
    count = max(1, int(round(np.log2(LOG_SOBOLEV_OUTER_RADIUS * resolution))))
    return np.geomspace(1.0 / resolution, LOG_SOBOLEV_OUTER_RADIUS, count + 1)


def _shell_offsets(n, lo, hi, inclusive_hi):
    """Lattice offsets with lo <= |delta|/n < hi (or <= hi on the last shell)."""
    reach = int(np.floor(hi * n)) + 1
    axis = np.arange(-reach, reach + 1)
    di, dj = np.meshgrid(axis, axis, indexing="ij")
    dist = np.hypot(di, dj) / n
    if inclusive_hi:
        keep = (dist >= lo) & (dist <= hi)
    else:
        keep = (dist >= lo) & (dist < hi)
    keep &= (di != 0) | (dj != 0)
    return np.stack([di[keep], dj[keep]], axis=1)


def log_sobolev(grid: GridField, shell_samples: int = 256, seed: int = 0) -> float:
    """Squared homogeneous log-Sobolev norm by stratified offset integration.

    The outer x-integral is the exact grid mean.  The inner integral over
    offsets |h| in [1/N, 1/5] is stratified over logarithmic shells.  Sparse
    shells (at most shell_samples lattice offsets) are summed exactly; dense
    shells are estimated by uniform sampling with the shell's area weight
    applied analytically and offsets snapped to the grid, so rho(x + h) is a
    pure lookup either way.
    """
    if shell_samples < 32:
        raise ConfigError(f"shell_samples must be >= 32, got {shell_samples}")
    n = grid.resolution
    values = grid.values
    rng = np.random.default_rng(seed)
    edges = _shell_edges(n)
    cell_area = 1.0 / n**2

    def mean_sq_increment(di, dj):
        shifted = np.roll(values, (-di, -dj), axis=(0, 1))
        return np.mean((shifted - values) ** 2)

    total = 0.0
    last = len(edges) - 2
    for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        offsets = _shell_offsets(n, lo, hi, inclusive_hi=(j == last))
        if len(offsets) <= shell_samples:
            # exact Riemann sum over this shell's lattice offsets
            for di, dj in offsets:
                dist2 = (di * di + dj * dj) / n**2
                total += mean_sq_increment(di, dj) / dist2 * cell_area
            continue
        radii = np.sqrt(rng.uniform(lo**2, hi**2, shell_samples))
        angles = rng.uniform(0.0, 2.0 * np.pi, shell_samples)
        shifts = np.round(
            np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1) * n
        ).astype(int)
        area = np.pi * (hi**2 - lo**2)
        mean_f = 0.0
        for di, dj in shifts:
            dist2 = (di * di + dj * dj) / n**2
            mean_f += mean_sq_increment(di, dj) / dist2
        total += area * mean_f / shell_samples
    return float(total)


def log_sobolev_brute_force(grid: GridField) -> float:
    """Full O(N^4) double Riemann sum of the same functional (oracle-grade)."""
    n = grid.resolution
    values = grid.values
    reach = int(np.floor(LOG_SOBOLEV_OUTER_RADIUS * n))
    total = 0.0
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            if di == 0 and dj == 0:
                continue
            dist2 = (di * di + dj * dj) / n**2
            if dist2 > LOG_SOBOLEV_OUTER_RADIUS**2:
                continue
            shifted = np.roll(values, (-di, -dj), axis=(0, 1))
            total += np.mean((shifted - values) ** 2) / dist2 / n**2
    return float(total)


def _ball_kernel(resolution, radius):
    k = np.arange(resolution)
    offsets = ((k + resolution // 2) % resolution - resolution // 2) / resolution
    dist2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    return (dist2 <= radius**2).astype(float)


def ball_averages(grid: GridField, radius: float):
    """Average of the scalar over the discrete ball of each grid node."""
    kernel = _ball_kernel(grid.resolution, radius)
    count = kernel.sum()
    conv = np.fft.irfft2(
        np.fft.rfft2(grid.values) * np.fft.rfft2(kernel), s=grid.values.shape
    )
    return conv / count


def mixing_scale(grid: GridField, kappa: float, radii) -> float:
    """Smallest scanned radius above which all ball averages are kappa-small.

    Returns max(radii) if the condition fails at the largest radius and
    min(radii) if it holds at every scanned radius.
    """
    if not (0.0 < kappa < 1.0):
        raise ConfigError(f"kappa must lie in (0, 1), got {kappa}")
    radii = sorted(float(r) for r in radii)
    if not radii:
        raise ConfigError("radii list must not be empty")
    if radii[-1] > 0.5:
        raise ConfigError(f"radii must not exceed 1/2, got {radii[-1]}")
    sup = grid.metadata.get("datum", {}).get("sup_norm")
    if sup is None:
        sup = float(np.max(np.abs(grid.values)))
    threshold = kappa * sup
    last_failure = -1
    for i, r in enumerate(radii):
        if np.max(np.abs(ball_averages(grid, r))) > threshold:
            last_failure = i
    if last_failure == len(radii) - 1:
        return radii[-1]
    if last_failure < 0:
        return radii[0]
    return radii[last_failure + 1]


def partition_entropy(weights) -> float:
    """Shannon entropy -sum w log w with the 0 log 0 = 0 convention."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ErgomixError("partition weights must be non-negative")
    total = weights.sum()
    if abs(total - 1.0) > 1e-9:
        raise ErgomixError(f"partition weights must sum to 1, got {total}")
    positive = weights[weights > 0]
    return float(-np.sum(positive * np.log(positive)))


def _orbit_codes(map_, partition, n, sample_count, rng):
    points = uniform_points(rng, sample_count)
    labels = np.empty((sample_count, n), dtype=np.int64)
    for t in range(n):
        labels[:, t] = partition.labels(points)
        if t < n - 1:
            points = map_.apply(points)
    return labels


def _plugin_entropy(labels, depth):
    sub = np.ascontiguousarray(labels[:, :depth])
    view = sub.view([("", sub.dtype)] * depth)
    _, counts = np.unique(view, return_counts=True)
    p = counts / len(sub)
    return float(-np.sum(p * np.log(p))), len(counts)


def entropy_rate(map_, partition: Partition, n: int, sample_count: int, seed: int):
    """Per-step entropy production of the map relative to the partition.

    Orbit segments are coded by the dyadic partition; the plug-in joint
    entropies H_j over the trailing depths j = ceil(n/2) .. n grow linearly
    once transients die out, and the fitted slope estimates the entropy rate.
    Returns (estimate, plug-in bias bound); raises UndersampledError when the
    sample barely covers the observed codebook.
    """
    if n < 1:
        raise ErgomixError(f"n must be >= 1, got {n}")
    if sample_count < 1:
        raise ErgomixError(f"sample_count must be >= 1, got {sample_count}")
    rng = np.random.default_rng(seed)
    labels = _orbit_codes(map_, partition, n, sample_count, rng)
    h_full, codes_full = _plugin_entropy(labels, n)
    required = int(np.ceil(ENTROPY_GUARD_FACTOR * codes_full))
    if sample_count < required:
        raise UndersampledError(
            f"undersampled: {codes_full} distinct depth-{n} codes require at least "
            f"{required} samples (factor {ENTROPY_GUARD_FACTOR}), got {sample_count}"
        )
    if n == 1:
        return h_full, (codes_full - 1) / (2.0 * sample_count)
    start = max(1, (n + 1) // 2)
    if start == n:
        start = n - 1
    depths = np.arange(start, n + 1)
    entropies = np.empty(len(depths))
    code_counts = np.empty(len(depths), dtype=int)
    for i, depth in enumerate(depths):
        if depth == n:
            entropies[i], code_counts[i] = h_full, codes_full
        else:
            entropies[i], code_counts[i] = _plugin_entropy(labels, depth)
    slope = np.polyfit(depths, entropies, 1)[0]
    bias_bound = (codes_full - code_counts[0]) / (2.0 * sample_count * (n - start))
    return float(slope), float(bias_bound)


def nu_log_bound(map_, partition: Partition, probes_per_cell: int = 64, seed: int = 0) -> float:
    """Cell-measure-weighted mean of log(# image cells hit by forward probes).

    A statistical lower approximation of the one-step refinement bound: for
    each cube, probes_per_cell uniform points are mapped forward and the
    distinct image cubes are counted.
    """
    if probes_per_cell < 16:
        raise ConfigError(f"probes_per_cell must be >= 16, got {probes_per_cell}")
    rng = np.random.default_rng(seed)
    side = 2**partition.level
    cells = partition.cell_count
    corners_x = np.repeat(np.arange(side), side) / side
    corners_y = np.tile(np.arange(side), side) / side
    total = 0.0
    offsets = rng.random((cells, probes_per_cell, 2)) / side
    probes = np.stack(
        [corners_x[:, None] + offsets[..., 0], corners_y[:, None] + offsets[..., 1]], axis=-1
    )
    images = map_.apply(probes.reshape(-1, 2)).reshape(cells, probes_per_cell, 2)
    image_labels = partition.labels(images)
    for cell in range(cells):
        total += np.log(len(np.unique(image_labels[cell])))
    return float(total / cells)


def maximal_ergodic(map_, g_values, x, horizon: int):
    """Largest orbit average of |g| over horizons 1..horizon, vectorized in x."""
    if horizon < 1:
        raise ErgomixError(f"horizon must be >= 1, got {horizon}")
    points = np.asarray(x, dtype=float)
    acc = np.zeros(points.shape[:-1])
    best = np.full(points.shape[:-1], -np.inf)
    current = points
    for i in range(horizon):
        acc = acc + np.abs(g_values(current))
        best = np.maximum(best, acc / (i + 1))
        if i < horizon - 1:
            current = map_.apply(current)
    return best
