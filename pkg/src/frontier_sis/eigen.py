"""Principal eigenvalue of the dispersal operator d(J*phi - phi) + a(x)phi.

The discrete operator on a cell-centered grid is A = d (W - I) + diag(a)
with W the kernel quadrature matrix. W is symmetric with positive diagonal
and a contiguous positive band (J(0) > 0), so A + s I with s = d + max|a| + 1
is nonnegative and irreducible whenever the grid resolves the kernel; its
dominant eigenvalue is simple with a positive eigenvector. Power iteration
with a Rayleigh-quotient readout therefore converges to the principal pair
without any library eigensolver, and the positivity of the returned
eigenfunction is structural rather than numerical luck.

Critical parameters are located by bisection:

  critical_length     halfwidth L of the symmetric interval where
                      lambda_p((-L, L)) crosses 0 (monotone in L)
  critical_diffusion  diffusion d where lambda_p((-h0, h0), d) crosses 0
                      (strictly decreasing in d; requires a kernel tail
                      beyond the interval diameter, else the large-d limit
                      is not guaranteed)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientModel, a_profile
from .kernel import KernelConvolution, KernelSpec, QuadratureGrid

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 100_000

SWEEP_AXES = ("d", "interval-halfwidth", "media-scale", "bed-scale")


class PowerIterationError(RuntimeError):
    """Raised when the residual target is not met within the iteration budget."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CriticalSearchError(RuntimeError):
    """Raised when a critical-parameter bracket cannot be established.

    `reason` is "always-negative" or "always-positive".
    """

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class EigenProblem:
    kernel: KernelSpec
    d: float
    grid: QuadratureGrid
    a: np.ndarray

    def __post_init__(self):
        if self.d < 0.0:
            raise ValueError("diffusion rate d must be >= 0")
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.grid.n_nodes,):
            raise ValueError("a must hold one value per grid node")
        if not np.all(np.isfinite(a)):
            raise ValueError("a must be finite at all nodes")
        object.__setattr__(self, "a", a)

    @staticmethod
    def on_interval(
        kernel: KernelSpec,
        d: float,
        L1: float,
        L2: float,
        n_nodes: int,
        a_source,
    ) -> "EigenProblem":
        """Build a problem on (L1, L2); `a_source` is a CoefficientModel,
        a callable, or an array of node values."""
        grid = QuadratureGrid(L1, L2, n_nodes)
        if isinstance(a_source, CoefficientModel):
            a = a_profile(a_source, grid.nodes)
        elif callable(a_source):
            a = np.asarray(a_source(grid.nodes), dtype=float)
        else:
            a = np.asarray(a_source, dtype=float)
        return EigenProblem(kernel, d, grid, a)


@dataclass(frozen=True)
class EigenResult:
    lambda_p: float
    phi: np.ndarray
    residual: float
    iterations: int


def assemble(problem: EigenProblem) -> np.ndarray:
    """Dense A = d (W - I) + diag(a). For tests and small-n oracles;
    the solver itself never materializes this."""
    n = problem.grid.n_nodes
    if problem.d == 0.0:
        return np.diag(problem.a)
    conv = KernelConvolution(problem.kernel, problem.grid)
    if n > 1 and problem.kernel.pdf(problem.grid.spacing) <= 0.0:
        raise ValueError(
            "grid spacing exceeds the kernel support; the operator matrix "
            "would be reducible (zero superdiagonal)"
        )
    W = conv.dense()
    return problem.d * (W - np.eye(n)) + np.diag(problem.a)


def principal_eigenvalue(
    problem: EigenProblem,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> EigenResult:
    """Dominant eigenpair of A by shifted power iteration.

    Stops when the sup-norm residual ||A phi - lambda phi||, with phi
    normalized to sup-norm 1, drops to `tol`. Non-convergence raises
    PowerIterationError carrying the last residual; an unconverged value is
    never returned silently.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a = problem.a
    n = problem.grid.n_nodes
    amax = float(np.max(a))

    if problem.d == 0.0:
        # Degenerate diagonal operator: the eigenvalue is max(a) exactly, but
        # no strictly positive eigenvector exists. Return a positive phi that
        # is 1 on the argmax set and small enough elsewhere that the residual
        # meets tol.
        spread = amax - float(np.min(a))
        floor = min(1.0, tol / (spread + 1.0))
        phi = np.where(a == amax, 1.0, floor)
        residual = float(np.max(np.abs((a - amax) * phi)))
        return EigenResult(amax, phi, residual, 0)

    conv = KernelConvolution(problem.kernel, problem.grid)
    if n > 1 and conv.table[conv.halfwidth + 1] <= 0.0:
        raise ValueError(
            "grid spacing exceeds the kernel support; power iteration needs "
            "an irreducible (banded-positive) operator"
        )

    d = problem.d
    shift = d + float(np.max(np.abs(a))) + 1.0
    diag = a - d + shift  # entrywise >= 1, keeps the iteration positive
    x = np.ones(n)
    lam_shifted = shift
    residual = np.inf
    for it in range(1, max_iters + 1):
        y = d * conv.apply(x) + diag * x
        lam_shifted = float(np.dot(x, y) / np.dot(x, x))
        residual = float(np.max(np.abs(y - lam_shifted * x)))
        x = y / np.max(np.abs(y))
        if residual <= tol:
            phi = x
            if phi.min() <= 0.0:
                raise PowerIterationError(
                    "eigenfunction lost strict positivity (floating-point "
                    "underflow at remote nodes); use a smaller interval",
                    residual,
                    it,
                )
            return EigenResult(lam_shifted - shift, phi, residual, it)
    raise PowerIterationError(
        f"power iteration did not reach residual {tol:.3g} within "
        f"{max_iters} iterations (last residual {residual:.3g})",
        residual,
        max_iters,
    )


@dataclass(frozen=True)
class SweepRow:
    value: float
    lambda_p: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class EigenSweepResult:
    axis: str
    rows: tuple
    expected_direction: str  # "nonincreasing" | "nondecreasing"
    max_violation: float


def eigen_sweep(
    problem: EigenProblem,
    axis: str,
    values,
    model: CoefficientModel | None = None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> EigenSweepResult:
    """Solve lambda_p along one parameter axis and check its monotonicity.

    Axes "interval-halfwidth", "media-scale" and "bed-scale" need `model` to
    rebuild a(x). Interval sweeps reuse the base grid spacing so the node
    sets nest and the discrete eigenvalues are provably monotone. A
    monotonicity violation beyond 2*tol raises ValueError.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    vals = [float(v) for v in values]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("sweep values must be sorted ascending and distinct")
    if axis != "d" and model is None:
        raise ValueError(f"axis {axis!r} requires the coefficient model")

    rows = []
    for v in vals:
        if axis == "d":
            p = EigenProblem(problem.kernel, v, problem.grid, problem.a)
        elif axis == "interval-halfwidth":
            # Keep the base spacing so node sets nest and the discrete
            # eigenvalues inherit the interval monotonicity exactly.
            dx = problem.grid.spacing
            n = max(2, int(round(2.0 * v / dx)))
            v_used = 0.5 * n * dx
            p = EigenProblem.on_interval(problem.kernel, problem.d, -v_used, v_used, n, model)
        elif axis == "media-scale":
            m = model.with_media_scale(v)
            p = EigenProblem(problem.kernel, problem.d, problem.grid, a_profile(m, problem.grid.nodes))
        else:
            m = model.with_bed_scale(v)
            p = EigenProblem(problem.kernel, problem.d, problem.grid, a_profile(m, problem.grid.nodes))
        try:
            r = principal_eigenvalue(p, tol=tol, max_iters=max_iters)
        except PowerIterationError as exc:
            raise PowerIterationError(
                f"eigen_sweep failed at {axis}={v}: {exc}", exc.residual, exc.iterations
            ) from exc
        rows.append(SweepRow(v, r.lambda_p, r.residual, r.iterations))

    lams = np.array([r.lambda_p for r in rows])
    if axis in ("d", "media-scale", "bed-scale"):
        direction = "nonincreasing"
        violation = float(np.max(np.diff(lams), initial=0.0))
    else:
        direction = "nondecreasing"
        violation = float(np.max(-np.diff(lams), initial=0.0))
    violation = max(violation, 0.0)
    if violation > 2.0 * tol:
        raise ValueError(
            f"lambda_p not {direction} along {axis}: max violation {violation:.3g} > 2*tol"
        )
    return EigenSweepResult(axis, tuple(rows), direction, violation)


def _search_grid_nodes(kernel: KernelSpec, length: float, dx: float | None) -> int:
    step = dx if dx is not None else kernel.width / 6.0
    return int(min(max(32, np.ceil(length / step)), 20_000))


def _solve_on(kernel, model, d, L, n, tol, max_iters):
    p = EigenProblem.on_interval(kernel, d, -L, L, n, model)
    return principal_eigenvalue(p, tol=tol, max_iters=max_iters).lambda_p


def critical_length(
    model: CoefficientModel,
    kernel: KernelSpec,
    d: float,
    tol: float = 1e-3,
    dx: float | None = None,
    L_min: float = 1e-3,
    L_max: float = 100.0,
    eigen_tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> float:
    """Halfwidth L* where lambda_p((-L, L)) crosses zero.

    Requires a sign change on [L_min, L_max]: negative at L_min (small
    intervals lose mass at rate ~d) and positive somewhere below L_max.
    Bisection is valid because lambda_p is nondecreasing in the interval.
    The returned midpoint has bracket width <= tol.
    """
    if d <= 0.0:
        raise ValueError("critical_length requires d > 0")

    def lam(L: float) -> float:
        n = _search_grid_nodes(kernel, 2 * L, dx)
        return _solve_on(kernel, model, d, L, n, eigen_tol, max_iters)

    if lam(L_min) >= 0.0:
        raise CriticalSearchError(
            f"lambda_p is already nonnegative at halfwidth {L_min:.3g} "
            "(growth exceeds dispersal loss on every interval)",
            reason="always-positive",
        )
    lo = L_min
    hi = max(2.0 * L_min, kernel.width)
    while lam(hi) < 0.0:
        lo = hi
        if hi >= L_max:
            raise CriticalSearchError(
                f"lambda_p stayed negative up to halfwidth {L_max:.3g}",
                reason="always-negative",
            )
        hi = min(2.0 * hi, L_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lam(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    L_star = 0.5 * (lo + hi)
    delta = 2.0 * tol
    if not (lam(max(L_star - delta, L_min / 2)) < 0.0 < lam(L_star + delta)):
        raise CriticalSearchError(
            "root validity check failed: lambda_p does not change sign "
            f"across L* = {L_star:.6g} +- {delta:.3g}",
            reason="always-negative",
        )
    return L_star


def critical_diffusion(
    model: CoefficientModel,
    kernel: KernelSpec,
    h0: float,
    tol: float = 1e-3,
    dx: float | None = None,
    eigen_tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> float:
    """Diffusion rate d* where lambda_p((-h0, h0), d) crosses zero.

    Returns 0 when a(x) <= 0 on the interval (no growth at any diffusion).
    Precondition: the kernel must place positive mass beyond the interval
    diameter 2*h0, otherwise lambda_p need not decrease to -infinity and the
    upper bracket is not guaranteed.
    """
    if h0 <= 0.0:
        raise ValueError("h0 must be positive")
    tail0 = kernel.tail(2.0 * h0)
    if tail0 <= 0.0:
        raise CriticalSearchError(
            f"kernel places no mass beyond 2*h0 = {2 * h0:.3g}; the large-d "
            "limit of lambda_p is not guaranteed to be negative",
            reason="always-positive",
        )
    n = _search_grid_nodes(kernel, 2 * h0, dx)
    grid = QuadratureGrid(-h0, h0, n)
    a = a_profile(model, grid.nodes)
    amax = float(np.max(a))
    if amax <= 0.0:
        return 0.0

    def lam(d: float) -> float:
        p = EigenProblem(kernel, d, grid, a)
        return principal_eigenvalue(p, tol=eigen_tol, max_iters=max_iters).lambda_p

    lo = 0.0  # lambda_p(0) = max a > 0 exactly (diagonal limit)
    hi = amax / (2.0 * tail0) + 1.0  # lambda_p(hi) <= max a - hi * 2 * tail0 < 0
    f_hi = lam(hi)
    while f_hi >= 0.0:
        hi *= 2.0
        f_hi = lam(hi)
        if hi > 1e12:
            raise CriticalSearchError(
                "no negative lambda_p found at any diffusion rate", reason="always-positive"
            )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lam(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
