"""Catalog of analytic divergence-free velocity fields on the 2-torus.

Every catalog member is 1-periodic in space and time, has an exact closed-form
gradient, and is divergence-free identically (not merely to discretization
error).  Time dependence, where present, is piecewise constant: a field is a
sequence of steady fields switched at the fractions-of-a-period listed in
``VelocityField.time_breakpoints``.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi

FIELD_KINDS = ("zero", "constant", "steady_shear", "alternating_shear", "cellular")


@dataclass(frozen=True)
class VelocityFieldSpec:
    """Parameters selecting one catalog field.

    phases are fractions of a period in [0, 1); their meaning depends on kind
    (shear offset, switching-half offsets, or cell offsets).
    """

    kind: str
    amplitude: float = 1.0
    phases: tuple = ()
    wavenumber: int = 1

    def validate(self):
        if self.kind not in FIELD_KINDS:
            raise ConfigError(
                f"unknown field kind {self.kind!r}; valid kinds: {', '.join(FIELD_KINDS)}"
            )
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise ConfigError(f"field amplitude must be finite and >= 0, got {self.amplitude}")
        if int(self.wavenumber) != self.wavenumber or self.wavenumber < 1:
            raise ConfigError(f"field wavenumber must be an integer >= 1, got {self.wavenumber}")
        for p in self.phases:
            if not (0.0 <= p < 1.0):
                raise ConfigError(f"field phases must lie in [0, 1), got {p}")


@dataclass(frozen=True)
class FieldSample:
    """Velocity vector and gradient matrix at one space-time point."""

    velocity: np.ndarray
    gradient: np.ndarray


class VelocityField:
    """A catalog field; evaluation is pure and safe to call concurrently.

    ``time_breakpoints`` lists the interior fractions of the unit period at
    which the closed form switches; it is empty for steady members.  Between
    consecutive breakpoints the field does not depend on t, which integrators
    exploit to resolve the switching branch unambiguously.
    """

    def __init__(self, spec: VelocityFieldSpec):
        spec.validate()
        self.spec = spec
        self.dim = 2
        self.time_breakpoints = (0.5,) if spec.kind == "alternating_shear" else ()

    def _phase(self, i):
        return self.spec.phases[i] if i < len(self.spec.phases) else 0.0

    def velocity(self, t, points):
        """Velocity b(t, x) for points of shape (..., 2)."""
        points = np.asarray(points, dtype=float)
        spec = self.spec
        amp, w = spec.amplitude, spec.wavenumber
        out = np.zeros_like(points)
        if spec.kind == "zero":
            return out
        if spec.kind == "constant":
            angle = TWO_PI * self._phase(0)
            out[..., 0] = amp * np.cos(angle)
            out[..., 1] = amp * np.sin(angle)
            return out
        if spec.kind == "steady_shear":
            out[..., 0] = amp * np.sin(TWO_PI * w * (points[..., 1] + self._phase(0)))
            return out
        if spec.kind == "alternating_shear":
            if (t % 1.0) < 0.5:
                out[..., 0] = amp * np.sin(TWO_PI * w * (points[..., 1] + self._phase(0)))
            else:
                out[..., 1] = amp * np.sin(TWO_PI * w * (points[..., 0] + self._phase(1)))
            return out
        # cellular: b = (d psi/dy, -d psi/dx) for psi ~ sin(2 pi w x) sin(2 pi w y)
        xs = TWO_PI * w * (points[..., 0] + self._phase(0))
        ys = TWO_PI * w * (points[..., 1] + self._phase(1))
        out[..., 0] = amp * np.sin(xs) * np.cos(ys)
        out[..., 1] = -amp * np.cos(xs) * np.sin(ys)
        return out

    def gradient(self, t, points):
        """Exact gradient matrix (d b_i / d x_j) of shape (..., 2, 2)."""
        points = np.asarray(points, dtype=float)
        spec = self.spec
        amp, w = spec.amplitude, spec.wavenumber
        grad = np.zeros(points.shape[:-1] + (2, 2))
        if spec.kind in ("zero", "constant"):
            return grad
        if spec.kind == "steady_shear":
            grad[..., 0, 1] = TWO_PI * w * amp * np.cos(TWO_PI * w * (points[..., 1] + self._phase(0)))
            return grad
        if spec.kind == "alternating_shear":
            if (t % 1.0) < 0.5:
                grad[..., 0, 1] = TWO_PI * w * amp * np.cos(
                    TWO_PI * w * (points[..., 1] + self._phase(0))
                )
            else:
                grad[..., 1, 0] = TWO_PI * w * amp * np.cos(
                    TWO_PI * w * (points[..., 0] + self._phase(1))
                )
            return grad
        xs = TWO_PI * w * (points[..., 0] + self._phase(0))
        ys = TWO_PI * w * (points[..., 1] + self._phase(1))
        c = TWO_PI * w * amp
        grad[..., 0, 0] = c * np.cos(xs) * np.cos(ys)
        grad[..., 0, 1] = -c * np.sin(xs) * np.sin(ys)
        grad[..., 1, 0] = c * np.sin(xs) * np.sin(ys)
        grad[..., 1, 1] = -c * np.cos(xs) * np.cos(ys)
        return grad

    def sample(self, t, x) -> FieldSample:
        """Velocity and gradient at a single point."""
        x = np.asarray(x, dtype=float)
        return FieldSample(velocity=self.velocity(t, x), gradient=self.gradient(t, x))


def make_field(spec: VelocityFieldSpec) -> VelocityField:
    """Instantiate a catalog field, rejecting invalid parameters."""
    return VelocityField(spec)


def spectral_norm_2x2(mats):
    """Largest singular value of a stack of 2x2 matrices, by closed form."""
    mats = np.asarray(mats, dtype=float)
    frob2 = np.sum(mats * mats, axis=(-2, -1))
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    gap = np.sqrt(np.maximum(frob2 * frob2 - 4.0 * det * det, 0.0))
    return np.sqrt(0.5 * (frob2 + gap))


def _gauss2_nodes(cells, lo, hi):
    # two-point Gauss-Legendre nodes on each of `cells` uniform subintervals
    width = (hi - lo) / cells
    centers = lo + (np.arange(cells) + 0.5) * width
    offset = width / (2.0 * np.sqrt(3.0))
    return np.sort(np.concatenate([centers - offset, centers + offset]))


def grad_l1_time_average(field: VelocityField, space_points=256, time_points=16) -> float:
    """Space-time average of the spectral norm of the velocity gradient.

    Tensor-product quadrature with two Gauss-Legendre nodes per cell on
    ``space_points`` cells per space axis and ``time_points`` cells in time.
    Positive weights; fourth order on the smooth pieces of the catalog, and
    the |cos| kinks of the shear members fall on cell boundaries for the
    power-of-two resolutions used in practice.
    """
    if space_points < 16 or time_points < 16:
        raise ConfigError(
            f"quadrature resolutions must be >= 16 per axis, got space={space_points} time={time_points}"
        )
    xs = _gauss2_nodes(space_points, 0.0, 1.0)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    ts = _gauss2_nodes(time_points, 0.0, 1.0)
    total = 0.0
    for t in ts:
        total += float(np.mean(spectral_norm_2x2(field.gradient(t, grid))))
    return total / len(ts)
