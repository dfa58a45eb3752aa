"""Shared numerical kernels.

Adaptive quadrature, special functions and the simplex fitter are thin
wrappers over scipy (QUADPACK, cephes); fixed Gauss-Legendre panel rules and
the Richardson differentiator are implemented here because the Laplace
transforms need rules that are smooth in the transform variable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be computed to the requested tolerance."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative kernel (extrapolation, fit) fails to converge."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_err_estimate: float
    evaluations: int


def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-8,
    points: Sequence[float] | None = None,
    limit: int = 500,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``b`` may be ``np.inf``. Interior ``points`` (kinks, jumps) are honoured on
    finite ranges; on a semi-infinite range the integral is split at the
    largest point so they are still respected.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    pts = sorted(float(p) for p in (() if points is None else points) if a < p < b)
    if math.isinf(b) and pts:
        head = integrate_adaptive(f, a, pts[-1], abs_tol / 2, rel_tol, pts[:-1], limit)
        tail = integrate_adaptive(f, pts[-1], b, abs_tol / 2, rel_tol, None, limit)
        return QuadratureResult(
            head.value + tail.value,
            head.abs_err_estimate + tail.abs_err_estimate,
            head.evaluations + tail.evaluations,
        )
    kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1)
    if pts:
        kwargs["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            out = integrate.quad(f, a, b, **kwargs)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    value, err, info = out[0], out[1], out[2]
    if not np.isfinite(value):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    if err > max(abs_tol, rel_tol * abs(value)):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] reached error {err:.3e} > requested tolerance"
        )
    return QuadratureResult(float(value), float(err), int(info["neval"]))


@lru_cache(maxsize=32)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre_panels(
    edges: Sequence[float] | np.ndarray, order: int = 16
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on sorted panel edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def panel_edges(a: float, b: float, breaks: Sequence[float] = (), n_min: int = 1) -> np.ndarray:
    """Panel edges on ``[a, b]`` that include every break point inside the range."""
    inner = [p for p in breaks if a < p < b]
    edges = np.unique(np.concatenate(([a, b], inner)))
    if n_min > 1:
        refined = [np.linspace(lo, hi, n_min + 1)[:-1] for lo, hi in zip(edges[:-1], edges[1:])]
        edges = np.concatenate(refined + [[b]])
    return edges


def upper_incomplete_gamma(s, x):
    """Non-normalised upper incomplete gamma function Gamma(s, x) for s > 0."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s <= 0):
        raise ValueError("upper_incomplete_gamma requires s > 0")
    if np.any(x < 0):
        raise ValueError("upper_incomplete_gamma requires x >= 0")
    out = special.gammaincc(s, x) * special.gamma(s)
    return out if out.ndim else float(out)


def gauss_2f1(a: float, b: float, c: float, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1."""
    if c <= 0 and float(c).is_integer():
        raise ValueError(f"2F1 undefined: c = {c} is a non-positive integer")
    z = np.asarray(z, dtype=float)
    if np.any(z >= 1):
        raise ValueError("gauss_2f1 is only provided for z < 1")
    out = special.hyp2f1(a, b, c, z)
    return out if out.ndim else float(out)


def _central_stencil(f, s: np.ndarray, k: int, h: np.ndarray) -> np.ndarray:
    # k-th central difference with half-integer offsets for odd k
    acc = np.zeros_like(s)
    for j in range(k + 1):
        acc = acc + (-1) ** j * math.comb(k, j) * f(s + (k / 2 - j) * h)
    return acc / h**k


def richardson_derivative(
    f: Callable[[np.ndarray], np.ndarray],
    s,
    k: int,
    target_rel: float = 1e-6,
    rel_step: float | None = None,
    levels: int = 6,
    return_error: bool = False,
    abs_floor: float = 0.0,
):
    """k-th derivative of a vectorised ``f`` at ``s`` by extrapolated central differences.

    The step starts at ``rel_step * |s|`` and is halved ``levels - 1`` times;
    the Richardson table removes the even powers of the step. Raises
    ``ConvergenceError`` when the achieved relative accuracy (difference of the
    last two diagonal entries) misses ``target_rel`` by more than a factor 100.
    Magnitudes below ``abs_floor`` are judged on absolute instead of relative
    error.
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if k == 0:
        val = np.asarray(f(s_arr), dtype=float)
        out = val if np.ndim(s) else val[0]
        return (out, np.zeros_like(val) if np.ndim(s) else 0.0) if return_error else out
    if rel_step is None:
        rel_step = 0.5 / k
    scale = np.where(s_arr != 0, np.abs(s_arr), 1.0)
    table = []
    for j in range(levels):
        h = rel_step * scale / 2**j
        row = [_central_stencil(f, s_arr, k, h)]
        for l in range(1, j + 1):
            prev = table[j - 1][l - 1]
            row.append(row[l - 1] + (row[l - 1] - prev) / (4**l - 1))
        table.append(row)
    best = table[-1][-1]
    err = np.abs(best - table[-1][-2])
    rel = err / np.maximum(np.abs(best), max(abs_floor, 1e-300))
    if np.any(~np.isfinite(best)) or np.any(rel > 100 * target_rel):
        raise ConvergenceError(
            f"Richardson extrapolation reached relative accuracy {np.nanmax(rel):.2e} "
            f"(target {target_rel:.1e}) for derivative order {k}"
        )
    if np.ndim(s) == 0:
        best, err = best[0], err[0]
    return (best, err) if return_error else best


@dataclass(frozen=True)
class FitResult:
    x: np.ndarray
    residual_rms: float
    converged: bool
    n_evaluations: int


def fit_simplex(
    objective: Callable[[np.ndarray], float],
    starts: Sequence[Sequence[float]],
    n_points: int,
    tol: float = 1e-10,
    max_evals: int = 40000,
) -> FitResult:
    """Multi-start Nelder-Mead minimisation of a sum of squared residuals.

    ``n_points`` converts the best objective value into an RMS residual.
    """
    best = None
    total = 0
    for x0 in starts:
        res = optimize.minimize(
            objective,
            np.asarray(x0, dtype=float),
            method="Nelder-Mead",
            options=dict(xatol=tol, fatol=tol, maxiter=max_evals, maxfev=max_evals),
        )
        total += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    return FitResult(
        x=np.asarray(best.x),
        residual_rms=math.sqrt(max(best.fun, 0.0) / n_points),
        converged=bool(best.success),
        n_evaluations=total,
    )


def sample_gamma(shape: float, scale: float, rng: np.random.Generator, size=None):
    return rng.gamma(shape, scale, size)


def meijerg_1222(a1: float, a2: float, b1: float, b2: float, z):
    """Meijer-G function G^{1,2}_{2,2}(z | a1, a2; b1, b2) for z > 0.

    Slater's theorem leaves a single Gauss hypergeometric term.
    """
    z = np.asarray(z, dtype=float)
    coef = special.gamma(1 + b1 - a1) * special.gamma(1 + b1 - a2) / special.gamma(1 + b1 - b2)
    out = coef * z**b1 * special.hyp2f1(1 + b1 - a1, 1 + b1 - a2, 1 + b1 - b2, -z)
    return out if out.ndim else float(out)


def meijerg_2122(a1: float, a2: float, b1: float, b2: float, z):
    """Meijer-G function G^{2,1}_{2,2}(z | a1; a2 ; b1, b2) for z > 0.

    Sum of two Gauss hypergeometric terms; requires ``b1 - b2`` non-integer.
    """
    if float(b1 - b2).is_integer():
        raise ValueError("G^{2,1}_{2,2} reduction needs a non-integer b1 - b2")
    z = np.asarray(z, dtype=float)
    out = 0.0
    for bh, bo in ((b1, b2), (b2, b1)):
        coef = special.gamma(bo - bh) * special.gamma(1 + bh - a1) / special.gamma(a2 - bh)
        out = out + coef * z**bh * special.hyp2f1(1 + bh - a1, 1 + bh - a2, 1 + bh - bo, -z)
    out = np.asarray(out)
    return out if out.ndim else float(out)
