"""Vectorised Gauss-Kronrod quadrature, composite Gauss-Legendre panels and
Richardson extrapolation.

All integrands take a 1-D array of abscissae and return either an array of the
same length or an ``(n, m)`` array for vector-valued integrands.
"""

from typing import NamedTuple

import numpy as np

from .errors import QuadratureNotConverged

# Kronrod 15-point nodes (non-negative half) and weights, Gauss 7-point weights
# for the even-indexed Kronrod nodes.  QUADPACK values.
_XGK15 = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK15 = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _full_rule():
    nodes = np.concatenate([-_XGK15[:-1], _XGK15[::-1]])
    kw = np.concatenate([_WGK15[:-1], _WGK15[::-1]])
    # Gauss nodes are Kronrod nodes 1, 3, 5 (counted from the ends) and the centre.
    gauss_half = np.zeros(8)
    gauss_half[1::2] = _WG7
    gw = np.concatenate([gauss_half[:-1], gauss_half[::-1]])
    return nodes, kw, gw


GK15_NODES, GK15_KRONROD, GK15_GAUSS = _full_rule()


class Estimate(NamedTuple):
    value: float
    error: float


def gk15_panels(a, b):
    """Nodes and weights of the GK15 rule on every interval ``[a[i], b[i]]``.

    Returns ``(x, wk, wg)`` each shaped ``(len(a), 15)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * GK15_NODES[None, :]
    wk = half[:, None] * GK15_KRONROD[None, :]
    wg = half[:, None] * GK15_GAUSS[None, :]
    return x, wk, wg


def _eval_panels(f, a, b):
    x, wk, wg = gk15_panels(a, b)
    vals = np.asarray(f(x.ravel()))
    vals = vals.reshape(x.shape + vals.shape[1:])
    scalar = vals.ndim == 2
    if scalar:
        vals = vals[..., None]
    ik = np.einsum("ij,ij...->i...", wk, vals)
    ig = np.einsum("ij,ij...->i...", wg, vals)
    err = np.max(np.abs(ik - ig), axis=-1)
    return ik, err, scalar


def integrate_adaptive(f, breakpoints, abs_tol=0.0, rel_tol=1e-10, max_depth=30,
                       max_intervals=200_000):
    """Globally adaptive GK15 integration of ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Interior breakpoints start as panel edges so kinks placed there never sit
    inside a panel.  Intervals whose error exceeds their length-weighted share
    of the tolerance are bisected until ``sum(err) <= max(abs_tol, rel_tol*|I|)``.

    Returns ``(value, error)``; value is a scalar or 1-D array.
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    if edges.size < 2:
        raise ValueError("need at least two distinct breakpoints")
    total_width = edges[-1] - edges[0]
    a, b = edges[:-1], edges[1:]
    vals, errs, scalar = _eval_panels(f, a, b)
    depth = np.zeros(a.size, dtype=int)

    while True:
        total = vals.sum(axis=0)
        err = errs.sum()
        tol = max(abs_tol, rel_tol * np.max(np.abs(total)))
        if err <= tol:
            break
        share = tol * (b - a) / total_width
        split = errs > share
        if not split.any():
            split = errs == errs.max()
        if (depth[split] >= max_depth).any() or a.size + split.sum() > max_intervals:
            value = total[0] if scalar else total
            raise QuadratureNotConverged(
                f"adaptive quadrature: error {err:.3e} > tolerance {tol:.3e} at depth limit",
                value=value, error=err)
        sa, sb = a[split], b[split]
        mid = 0.5 * (sa + sb)
        na = np.concatenate([sa, mid])
        nb = np.concatenate([mid, sb])
        nv, ne, _ = _eval_panels(f, na, nb)
        nd = np.concatenate([depth[split], depth[split]]) + 1
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        depth = np.concatenate([depth[keep], nd])

    # Fixed-order reduction: sort panels by position before summing.
    order = np.argsort(a, kind="stable")
    total = vals[order].sum(axis=0)
    value = total[0] if scalar else total
    return value, float(errs.sum())


def gauss_legendre_panels(lo, hi, panel_width, order=16):
    """Composite Gauss-Legendre nodes/weights on ``[lo, hi]`` with panels no
    wider than ``panel_width``."""
    n_panels = max(1, int(np.ceil((hi - lo) / panel_width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    x0, w0 = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    w = (half[:, None] * w0[None, :]).ravel()
    return x, w


class Extrapolation(NamedTuple):
    value: complex
    error: float
    order: float
    sequence: tuple


def richardson(values, ratio=2.0, default_order=2.0):
    """Richardson-extrapolate a sequence computed at geometrically growing resolution.

    The convergence order is estimated from the last three terms when
    possible; sequences already converged to rounding are returned as is.
    """
    v = np.asarray(values)
    if v.ndim == 0 or v.shape[0] < 2:
        last = v if v.ndim == 0 else v[-1]
        return Extrapolation(last, float("inf"), float("nan"), tuple(np.atleast_1d(v)))
    d_last = v[-1] - v[-2]
    scale = max(np.max(np.abs(v[-1])), 1e-300)
    if np.max(np.abs(d_last)) <= 8 * np.finfo(float).eps * scale:
        return Extrapolation(v[-1], float(np.max(np.abs(d_last))), float("inf"), tuple(v))
    order = default_order
    if v.shape[0] >= 3:
        d_prev = v[-2] - v[-3]
        num = np.max(np.abs(d_prev))
        den = np.max(np.abs(d_last))
        if num > 0 and den > 0:
            observed = np.log(num / den) / np.log(ratio)
            if np.isfinite(observed) and observed > 0.5:
                order = min(observed, 12.0)
    factor = ratio**order - 1.0
    extrap = v[-1] + d_last / factor
    err = float(np.max(np.abs(d_last / factor)))
    return Extrapolation(extrap, err, float(order), tuple(v))


def romberg(values, ratio=2.0, orders=(2, 4, 6, 8)):
    """Full Richardson table for an error series in known powers of the step.

    ``values[i]`` is computed at step ``h0 / ratio**i``; the error is assumed
    to expand as ``c1 h^orders[0] + c2 h^orders[1] + ...``.  The error
    estimate is the change contributed by the last elimination.
    """
    v = np.asarray(values, dtype=complex if np.iscomplexobj(values) else float)
    if v.shape[0] < 2:
        return Extrapolation(v[-1], float("inf"), float("nan"), tuple(v))
    row = list(v)
    err = float(np.max(np.abs(row[-1] - row[-2])))
    used = 0.0
    for p in orders[: v.shape[0] - 1]:
        f = ratio**p - 1.0
        new = [row[i + 1] + (row[i + 1] - row[i]) / f for i in range(len(row) - 1)]
        err = float(np.max(np.abs(new[-1] - row[-1])))
        row = new
        used = p
    return Extrapolation(row[-1], err, float(used), tuple(v))
