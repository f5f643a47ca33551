"""Epidemiological coefficients and the infection growth profile a(x).

The transmission rate responds to media exposure m(x) and to prevalence:

    beta(x, I) = beta0(x) * exp(-m(x)) * (1 + c * I / (1 + I))

nonincreasing in m, nondecreasing in I, with bounded dI-derivative. The
recovery rate responds to hospital-bed availability b(x) saturating with
prevalence:

    gamma(x, I) = gamma0(x) + (gamma1(x) - gamma0(x)) * b(x) / (b(x) + I)

with the b = 0 convention gamma = gamma0 for I > 0 and gamma1 for I = 0
(the quotient is 0/0 there; each axis limit is taken separately).

The linearized growth profile at the disease-free state S = sigma/mu1 is

    a(x) = sigma * beta(x, 0) / mu1 - mu2 - gamma(x, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

SPATIAL_KINDS = ("constant", "gaussian-bump", "piecewise-linear")


@dataclass(frozen=True)
class SpatialFunction:
    """Closed-form spatial field; continuous, bounded, Lipschitz by family."""

    kind: str
    level: float = 0.0
    center: float = 0.0
    amplitude: float = 0.0
    width: float = 1.0
    knots_x: tuple = ()
    knots_y: tuple = ()

    @staticmethod
    def constant(level: float) -> "SpatialFunction":
        return SpatialFunction("constant", level=float(level))

    @staticmethod
    def gaussian_bump(
        center: float, amplitude: float, width: float, baseline: float = 0.0
    ) -> "SpatialFunction":
        if width <= 0:
            raise ValueError("gaussian-bump width must be positive")
        return SpatialFunction(
            "gaussian-bump",
            level=float(baseline),
            center=float(center),
            amplitude=float(amplitude),
            width=float(width),
        )

    @staticmethod
    def piecewise_linear(knots) -> "SpatialFunction":
        xs = tuple(float(x) for x, _ in knots)
        ys = tuple(float(y) for _, y in knots)
        if len(xs) < 2:
            raise ValueError("piecewise-linear needs at least two knots")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("piecewise-linear knot abscissae must be strictly increasing")
        return SpatialFunction("piecewise-linear", knots_x=xs, knots_y=ys)

    def __call__(self, x):
        scalar = np.isscalar(x)
        xv = np.asarray(x, dtype=float)
        if self.kind == "constant":
            out = np.full_like(xv, self.level)
        elif self.kind == "gaussian-bump":
            out = self.level + self.amplitude * np.exp(-(((xv - self.center) / self.width) ** 2))
        else:
            # np.interp extends by the boundary knot values (constant extension)
            out = np.interp(xv, self.knots_x, self.knots_y)
        return float(out) if scalar else out

    def sup(self) -> float:
        if self.kind == "constant":
            return self.level
        if self.kind == "gaussian-bump":
            return self.level + max(self.amplitude, 0.0)
        return max(self.knots_y)

    def inf(self) -> float:
        if self.kind == "constant":
            return self.level
        if self.kind == "gaussian-bump":
            return self.level + min(self.amplitude, 0.0)
        return min(self.knots_y)

    def scaled(self, factor: float) -> "SpatialFunction":
        """Pointwise multiple; used by media/bed sweeps."""
        f = float(factor)
        if self.kind == "constant":
            return replace(self, level=self.level * f)
        if self.kind == "gaussian-bump":
            return replace(self, level=self.level * f, amplitude=self.amplitude * f)
        return replace(self, knots_y=tuple(y * f for y in self.knots_y))


@dataclass(frozen=True)
class CoefficientModel:
    sigma: float
    mu1: float
    mu2: float
    beta0: SpatialFunction
    media: SpatialFunction
    beds: SpatialFunction
    gamma0: SpatialFunction
    gamma1: SpatialFunction
    beta_I_gain: float = 0.0

    def __post_init__(self):
        for name in ("sigma", "mu1", "mu2"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ValueError(f"{name} must be positive (got {v})")
        if self.beta0.inf() <= 0.0:
            raise ValueError("beta0 must be strictly positive everywhere")
        for name in ("media", "beds", "gamma0"):
            if getattr(self, name).inf() < 0.0:
                raise ValueError(f"{name} must be nonnegative everywhere")
        if self.beta_I_gain < 0.0:
            raise ValueError("beta_I_gain must be nonnegative")
        # gamma0 <= gamma1 pointwise, checked on a dense sample of the
        # closed-form families (exact checks per kind are not worth the code).
        xs = self._probe_points()
        if np.any(self.gamma0(xs) > self.gamma1(xs) + 1e-12):
            raise ValueError("gamma0 must not exceed gamma1 anywhere")

    def _probe_points(self) -> np.ndarray:
        pts = [0.0]
        for f in (self.beta0, self.media, self.beds, self.gamma0, self.gamma1):
            if f.kind == "gaussian-bump":
                pts += [f.center - 3 * f.width, f.center, f.center + 3 * f.width]
            elif f.kind == "piecewise-linear":
                pts += list(f.knots_x)
        lo, hi = min(pts) - 1.0, max(pts) + 1.0
        return np.linspace(lo, hi, 2049)

    def sup_beta(self) -> float:
        """Upper bound on beta over all x and I >= 0."""
        return self.beta0.sup() * (1.0 + self.beta_I_gain)

    def sup_gamma(self) -> float:
        return self.gamma1.sup()

    def with_media_scale(self, factor: float) -> "CoefficientModel":
        return replace(self, media=self.media.scaled(factor))

    def with_bed_scale(self, factor: float) -> "CoefficientModel":
        return replace(self, beds=self.beds.scaled(factor))


def _require_I_nonnegative(I) -> np.ndarray:
    Iv = np.asarray(I, dtype=float)
    if np.any(Iv < 0.0):
        raise ValueError("prevalence I must be nonnegative")
    return Iv


def beta(model: CoefficientModel, x, I) -> float | np.ndarray:
    """Transmission rate beta(m(x), I, x)."""
    Iv = _require_I_nonnegative(I)
    scalar = np.isscalar(x) and np.isscalar(I)
    out = model.beta0(x) * np.exp(-model.media(x)) * (
        1.0 + model.beta_I_gain * Iv / (1.0 + Iv)
    )
    return float(out) if scalar else out


def gamma(model: CoefficientModel, x, I) -> float | np.ndarray:
    """Recovery rate gamma(b(x), I, x), bed-saturated."""
    Iv = _require_I_nonnegative(I)
    scalar = np.isscalar(x) and np.isscalar(I)
    b = np.asarray(model.beds(x), dtype=float)
    b, Iv = np.broadcast_arrays(b, Iv)
    frac = np.empty_like(b)
    pos = b > 0.0
    frac[pos] = b[pos] / (b[pos] + Iv[pos])
    frac[~pos] = np.where(Iv[~pos] > 0.0, 0.0, 1.0)
    g0 = model.gamma0(x)
    g1 = model.gamma1(x)
    out = g0 + (g1 - g0) * frac
    return float(out) if scalar else out


def a_profile(model: CoefficientModel, nodes) -> np.ndarray:
    """Disease-free linearized growth rate a(x) at each node."""
    xv = np.atleast_1d(np.asarray(nodes, dtype=float))
    if not np.all(np.isfinite(xv)):
        raise ValueError("a_profile nodes must be finite")
    zero = np.zeros_like(xv)
    return model.sigma * beta(model, xv, zero) / model.mu1 - model.mu2 - gamma(model, xv, zero)
