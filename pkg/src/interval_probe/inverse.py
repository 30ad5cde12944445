"""Length reconstruction: misfit functional, noise model, bounded search, landscapes."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .core import (
    Grid,
    HeatProblem,
    InvalidInputError,
    Problem,
    Signal,
    WaveProblem,
    seeded_rng,
    spawn_seeds,
    trapezoid_integral,
)
from .heat import boundary_flux_left, heat_fd_solve
from .wave import wave_fd_solve

GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
SQRT_EPS = math.sqrt(np.finfo(float).eps)

# The misfit reads the flux with the 5-point one-sided stencil: its O(dx^4) error
# leaves the scheme's own error as the only bias in the reconstructed length.
FLUX_ORDER = 4


class ForwardSolveError(RuntimeError):
    """A forward solve failed while evaluating the misfit at ``ell``."""

    def __init__(self, ell: float, cause: Exception):
        super().__init__(f"forward solve failed at length {ell!r}: {cause}")
        self.ell = ell


def worker_count() -> int:
    env = os.environ.get("INTERVAL_PROBE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def observe(problem: Problem, grid: Grid) -> Signal:
    """Finite-difference observation u_x(0, .) on the solver's own time grid."""
    if isinstance(problem, HeatProblem):
        return boundary_flux_left(heat_fd_solve(problem, grid), FLUX_ORDER)
    if isinstance(problem, WaveProblem):
        return boundary_flux_left(wave_fd_solve(problem, grid), FLUX_ORDER)
    raise InvalidInputError(f"unsupported problem type {type(problem).__name__}")


def resample(sig: Signal, onto: Signal) -> np.ndarray:
    """Values of ``sig`` at the sample times of ``onto`` (cubic spline in time)."""
    if sig.same_grid(onto):
        return np.array(sig.samples)
    t = onto.times
    tol = 1e-9 * max(1.0, sig.t_end)
    if t[0] < sig.t0 - tol or t[-1] > sig.t_end + tol:
        raise InvalidInputError(
            f"observation window [{t[0]}, {t[-1]}] exceeds solver span [{sig.t0}, {sig.t_end}]"
        )
    return CubicSpline(sig.times, sig.samples)(t)


def make_target(template: Problem, length: float, grid: Grid, refine: int = 2) -> Signal:
    """Synthetic observation at ``length`` on a grid ``refine`` times finer, cut to [0, horizon]."""
    sig = observe(template.at_length(length), grid.refined(refine) if refine > 1 else grid)
    n = int(math.floor(template.horizon / sig.dt + 1e-9)) + 1
    return Signal(sig.samples[: min(n, len(sig))], sig.dt, sig.t0)


@dataclass(frozen=True)
class InverseProblem:
    """Recover the length of ``template`` (its own length is ignored) from ``target``."""

    template: Problem
    target: Signal
    bracket: tuple[float, float]
    grid: Grid = field(default_factory=Grid)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.bracket)
        if not (0 < lo < hi and math.isfinite(hi)):
            raise InvalidInputError(f"bracket must satisfy 0 < lo < hi, got {self.bracket}")
        object.__setattr__(self, "bracket", (lo, hi))
        if not isinstance(self.target, Signal):
            raise InvalidInputError("target must be a Signal")
        if self.target.t0 < 0 or self.target.t_end > self.template.horizon * (1 + 1e-9):
            raise InvalidInputError("target must live inside [0, horizon]")

    def problem_at(self, ell: float) -> Problem:
        return self.template.at_length(ell)

    def with_target(self, target: Signal) -> "InverseProblem":
        return replace(self, target=target)

    def with_bracket(self, lo: float, hi: float) -> "InverseProblem":
        return replace(self, bracket=(lo, hi))


def cost(ell: float, ip: InverseProblem) -> float:
    """J(ell) = 1/2 * integral over the target window of (beta - u_x^ell(0, .))^2."""
    lo, hi = ip.bracket
    slack = 1e-12 * hi
    if not (lo - slack <= ell <= hi + slack):
        raise InvalidInputError(f"length {ell} outside bracket {ip.bracket}")
    try:
        flux = observe(ip.problem_at(ell), ip.grid)
        model = resample(flux, ip.target)
    except Exception as exc:
        raise ForwardSolveError(ell, exc) from exc
    res = ip.target.samples - model
    return 0.5 * trapezoid_integral(ip.target.with_samples(res * res))


def add_noise(beta: Signal, percent: float, seed) -> Signal:
    """beta_j * (1 + percent/100 * xi_j), xi_j uniform on [-1, 1]."""
    if not (percent >= 0):
        raise InvalidInputError(f"noise percent must be >= 0, got {percent}")
    if percent == 0:
        return beta
    xi = seeded_rng(seed).uniform(-1.0, 1.0, size=len(beta))
    return beta.with_samples(beta.samples * (1.0 + 0.01 * percent * xi))


@dataclass(frozen=True)
class ReconstructionResult:
    L_c: float
    iterates: tuple[tuple[float, float], ...]
    final_cost: float
    evaluations: int
    termination: str  # "converged" | "max-iter" | "bracket-edge"


def brent_minimize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float,
    xtol: float = 1e-6,
    ftol: float | None = None,
    max_iter: int = 100,
) -> ReconstructionResult:
    """Bounded Brent search (golden section + successive parabolas) started at ``x0``.

    Stops when the bracket shrinks below roughly ``xtol``, when a value below
    ``ftol`` is found (``None`` disables that test), or after ``max_iter``
    iterations.  Every evaluation is recorded in ``iterates``.
    """
    if not (lo < x0 < hi):
        raise InvalidInputError(f"start {x0} must lie strictly inside ({lo}, {hi})")
    a, b = lo, hi
    history: list[tuple[float, float]] = []

    def ev(x):
        y = float(f(x))
        history.append((x, y))
        return y

    x = w = v = x0
    fx = ev(x)
    fw = fv = fx
    d = e = 0.0
    termination = "max-iter"
    if ftol is not None and fx < ftol:
        termination = "converged"
    else:
        for _ in range(max_iter):
            xm = 0.5 * (a + b)
            tol1 = SQRT_EPS * abs(x) + xtol / 3.0
            tol2 = 2.0 * tol1
            if abs(x - xm) <= tol2 - 0.5 * (b - a):
                termination = "converged"
                break
            golden = True
            if abs(e) > tol1:
                r = (x - w) * (fx - fv)
                q = (x - v) * (fx - fw)
                p = (x - v) * q - (x - w) * r
                q = 2.0 * (q - r)
                if q > 0.0:
                    p = -p
                q = abs(q)
                e_prev, e = e, d
                if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                    d = p / q
                    u = x + d
                    if (u - a) < tol2 or (b - u) < tol2:
                        d = tol1 if x < xm else -tol1
                    golden = False
            if golden:
                e = (a - x) if x >= xm else (b - x)
                d = GOLDEN * e
            u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
            fu = ev(u)
            if fu <= fx:
                if u >= x:
                    a = x
                else:
                    b = x
                v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
            else:
                if u < x:
                    a = u
                else:
                    b = u
                if fu <= fw or w == x:
                    v, fv, w, fw = w, fw, u, fu
                elif fu <= fv or v == x or v == w:
                    v, fv = u, fu
            if ftol is not None and fx < ftol:
                termination = "converged"
                break
    edge = 2.0 * (SQRT_EPS * abs(x) + xtol)
    if termination == "converged" and (x - lo < edge or hi - x < edge):
        termination = "bracket-edge"
    return ReconstructionResult(x, tuple(history), fx, len(history), termination)


def minimize_length(
    ip: InverseProblem,
    ell_init: float,
    max_iter: int = 100,
    tol_ell: float = 1e-6,
    tol_cost: float | None = 1e-15,
    multistart_count: int = 1,
) -> ReconstructionResult:
    """Minimise the misfit over ``ip.bracket`` starting from ``ell_init``.

    With ``multistart_count`` = m > 1 the search is repeated from m - 1
    further equispaced seeds and the lowest final cost wins (the run from
    ``ell_init`` is always one of them).  The returned history and evaluation
    count cover all runs.
    """
    lo, hi = ip.bracket
    if not (lo < ell_init < hi):
        raise InvalidInputError(f"initial length {ell_init} must lie inside bracket {ip.bracket}")
    seeds = [ell_init]
    m = max(1, int(multistart_count))
    seeds += [lo + k * (hi - lo) / m for k in range(1, m)]

    def f(ell):
        return cost(ell, ip)

    runs = [brent_minimize(f, lo, hi, s, tol_ell, tol_cost, max_iter) for s in seeds]
    best = min(runs, key=lambda r: r.final_cost)
    if len(runs) == 1:
        return best
    history = tuple(it for r in runs for it in r.iterates)
    return replace(best, iterates=history, evaluations=len(history))


@dataclass(frozen=True)
class LocalMinimum:
    bracket: tuple[float, float, float]
    result: ReconstructionResult

    @property
    def ell(self) -> float:
        return self.result.L_c

    @property
    def cost(self) -> float:
        return self.result.final_cost


@dataclass(frozen=True, eq=False)
class CostLandscape:
    samples: np.ndarray  # shape (n, 2): columns ell, J(ell)
    local_minima: tuple[LocalMinimum, ...]

    @property
    def ell(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def cost(self) -> np.ndarray:
        return self.samples[:, 1]


def _parallel_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def scan_cost(
    ip: InverseProblem,
    n_samples: int = 41,
    tol_ell: float = 1e-6,
    max_iter: int = 100,
) -> CostLandscape:
    """Sample J on an equispaced grid over the bracket and refine every strict interior minimum."""
    if n_samples < 10:
        raise InvalidInputError("n_samples must be >= 10")
    lo, hi = ip.bracket
    ells = lo + np.arange(n_samples) * ((hi - lo) / (n_samples - 1))
    ells[-1] = hi
    J = np.array(_parallel_map(lambda e: cost(float(e), ip), ells))

    minima = []
    for i in range(1, n_samples - 1):
        if J[i] < J[i - 1] and J[i] < J[i + 1]:
            sub = ip.with_bracket(float(ells[i - 1]), float(ells[i + 1]))
            res = minimize_length(sub, float(ells[i]), max_iter=max_iter, tol_ell=tol_ell, tol_cost=None)
            minima.append(LocalMinimum((float(ells[i - 1]), float(ells[i]), float(ells[i + 1])), res))
    return CostLandscape(np.column_stack((ells, J)), tuple(minima))


@dataclass(frozen=True)
class SweepRow:
    level: float
    final_cost: float
    iterates: int
    L_c: float
    seed: int
    termination: str = ""
    error: str | None = None


def noise_sweep(
    ip: InverseProblem,
    ell_init: float,
    levels: Sequence[float],
    seed: int,
    **opts,
) -> list[SweepRow]:
    """One noisy reconstruction per level, each with its own sub-seed of ``seed``.

    A failing level yields a row with ``error`` set and NaN results; the
    sweep itself never raises for per-level failures.
    """
    levels = [float(v) for v in levels]
    if any(not (v >= 0) for v in levels):
        raise InvalidInputError("noise levels must be >= 0")
    subseeds = spawn_seeds(seed, len(levels))

    def run(k):
        level, s = levels[k], subseeds[k]
        try:
            noisy = ip.with_target(add_noise(ip.target, level, s))
            res = minimize_length(noisy, ell_init, **opts)
            return SweepRow(level, res.final_cost, res.evaluations, res.L_c, s, res.termination)
        except Exception as exc:  # noqa: BLE001 - recorded in the row
            return SweepRow(level, math.nan, 0, math.nan, s, "failed", f"{type(exc).__name__}: {exc}")

    return _parallel_map(run, range(len(levels)))
