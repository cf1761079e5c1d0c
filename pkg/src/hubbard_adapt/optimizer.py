"""Limited-memory BFGS with a strong-Wolfe line search.

Written out rather than delegated to SciPy so iterates are deterministic and
the stopping rule matches :class:`OptimizeConfig` exactly.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]

C1 = 1e-4
C2 = 0.9
MAX_LS_EVALS = 40


@dataclass(frozen=True)
class OptimizeConfig:
    grad_tol: float = 1e-6
    f_tol: float = 1e-10
    max_iters: int = 500
    history_size: int = 10

    def __post_init__(self):
        for name in ("grad_tol", "f_tol", "max_iters", "history_size"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"OptimizeConfig.{name} must be positive")


@dataclass(frozen=True)
class OptimizeResult:
    x_star: np.ndarray
    f_star: float
    grad_norm: float
    iterations: int
    converged: bool
    n_evals: int = 0
    message: str = ""


class _Counted:
    def __init__(self, fun: Objective):
        self.fun = fun
        self.n = 0

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self.n += 1
        f, g = self.fun(x)
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise NumericalError(f"objective is not finite at x={x.tolist()}", x=x.copy())
        return f, g


def _cubic_min(a, fa, dfa, b, fb, dfb):
    """Minimizer of the cubic interpolant on [a, b], or None."""
    d1 = dfa + dfb - 3 * (fa - fb) / (a - b)
    disc = d1 * d1 - dfa * dfb
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = dfb - dfa + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (dfb + d2 - d1) / denom


def _interpolate(lo, f_lo, d_lo, hi, f_hi, d_hi):
    trial = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
    left, right = min(lo, hi), max(lo, hi)
    span = right - left
    if trial is None or not np.isfinite(trial) or not (left + 0.1 * span <= trial <= right - 0.1 * span):
        trial = 0.5 * (lo + hi)
    return trial


def line_search(fun, x, f0, g0, direction, alpha0=1.0):
    """Strong-Wolfe search along ``direction``; returns ``(alpha, f, g)`` or ``None``."""
    dphi0 = float(g0 @ direction)
    if dphi0 >= 0:
        return None

    def phi(a):
        f, g = fun(x + a * direction)
        return f, g, float(g @ direction)

    def zoom(lo, f_lo, d_lo, g_lo, hi, f_hi, d_hi):
        for _ in range(MAX_LS_EVALS):
            a = _interpolate(lo, f_lo, d_lo, hi, f_hi, d_hi)
            f, g, d = phi(a)
            if f > f0 + C1 * a * dphi0 or f >= f_lo:
                hi, f_hi, d_hi = a, f, d
            else:
                if abs(d) <= -C2 * dphi0:
                    return a, f, g
                if d * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo, g_lo = a, f, d, g
            if abs(hi - lo) < 1e-14 * max(1.0, abs(lo)):
                break
        # sufficient decrease without curvature is still an acceptable step
        if lo > 0 and f_lo < f0:
            return lo, f_lo, g_lo
        return None

    a_prev, f_prev, d_prev, g_prev = 0.0, f0, dphi0, g0
    a = alpha0
    for i in range(MAX_LS_EVALS):
        f, g, d = phi(a)
        if f > f0 + C1 * a * dphi0 or (i > 0 and f >= f_prev):
            return zoom(a_prev, f_prev, d_prev, g_prev, a, f, d)
        if abs(d) <= -C2 * dphi0:
            return a, f, g
        if d >= 0:
            return zoom(a, f, d, g, a_prev, f_prev, d_prev)
        a_prev, f_prev, d_prev, g_prev = a, f, d, g
        a = 2.0 * a
    return None


def _two_loop(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
        rho = 1.0 / (y @ s)
        b = rho * (y @ q)
        q += s * (a - b)
    return -q


def minimize(objective: Objective, x0, config: OptimizeConfig = OptimizeConfig()) -> OptimizeResult:
    """Minimize ``objective(x) -> (f, grad)`` from ``x0``.

    Stops when ``||grad||_2 <= grad_tol`` or an accepted step lowers ``f`` by at
    most ``f_tol``. Accepted steps never increase ``f``.
    """
    fun = _Counted(objective)
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    if x.size == 0:
        return OptimizeResult(x, f, 0.0, 0, True, fun.n, "empty parameter vector")
    s_hist: deque[np.ndarray] = deque(maxlen=config.history_size)
    y_hist: deque[np.ndarray] = deque(maxlen=config.history_size)
    gnorm = float(np.linalg.norm(g))
    it = 0
    message = "max_iters reached"
    converged = False
    while it < config.max_iters:
        if gnorm <= config.grad_tol:
            converged, message = True, "gradient norm below grad_tol"
            break
        direction = _two_loop(g, list(s_hist), list(y_hist))
        if not g @ direction < 0:
            s_hist.clear()
            y_hist.clear()
            direction = -g
        alpha0 = 1.0 if s_hist else min(1.0, 1.0 / gnorm)
        step = line_search(fun, x, f, g, direction, alpha0)
        if step is None and s_hist:
            s_hist.clear()
            y_hist.clear()
            direction = -g
            step = line_search(fun, x, f, g, direction, min(1.0, 1.0 / gnorm))
        if step is None:
            message = "line search failed"
            break
        alpha, f_new, g_new = step
        it += 1
        s = alpha * direction
        y = g_new - g
        if s @ y > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
        x = x + s
        df = f - f_new
        f, g = f_new, g_new
        gnorm = float(np.linalg.norm(g))
        if gnorm <= config.grad_tol:
            converged, message = True, "gradient norm below grad_tol"
            break
        if abs(df) <= config.f_tol:
            converged, message = True, "function decrease below f_tol"
            break
    log.debug("minimize: %s after %d iterations (f=%.12g, |g|=%.3e)", message, it, f, gnorm)
    return OptimizeResult(x, f, gnorm, it, converged, fun.n, message)
