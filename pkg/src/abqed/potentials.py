"""Lorenz-gauge quasistatic effective potentials by real-space Green's-function
quadrature, with analytic fast paths and circulation/energy oracles.

Time enters only through source schedules (no retardation).
"""

from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from .errors import NonCompactSource, OpenLoop, SelfEnergyDivergent
from .quadrature import Estimate, gauss_legendre_panels, integrate_adaptive, richardson
from .sources import (CLOSURE_TOL, ChargedShell, CurrentLoop, FiniteSolenoid,
                      GaussianChargeBall, InfiniteSolenoid, PointCharge, PolylineCurrent,
                      SourceConfiguration)


@dataclass(frozen=True)
class QuadratureSettings:
    max_subdivision_depth: int = 30
    rel_tol: float = 1e-10
    kernel_regularization: float = 0.0
    force_quadrature: bool = False
    point_chunk: int = 16

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_subdivision_depth < 1:
            raise ValueError("max_subdivision_depth must be >= 1")
        if self.kernel_regularization < 0:
            raise ValueError("kernel_regularization must be >= 0")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class EffectiveFieldSample:
    position: np.ndarray
    time: float
    V: float
    A: np.ndarray
    est_error: tuple  # (relative error of V, relative error of A)

    def __post_init__(self):
        if min(self.est_error) < 0:
            raise ValueError("error estimates must be non-negative")


def _points_times(r, t):
    pts = np.atleast_2d(np.asarray(r, dtype=float))
    times = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],)).copy()
    return pts, times


# ---------------------------------------------------------------------------
# scalar potential

def _shell_quadrature(e, d, settings, k):
    """Surface integral over a uniformly charged shell, reduced to the polar angle."""
    a = e.radius
    out = np.empty_like(d)
    err = np.empty_like(d)
    for i, di in enumerate(d):
        f = lambda th: 0.5 * np.sin(th) / np.sqrt(np.maximum(di * di + a * a - 2 * a * di * np.cos(th), 1e-300))
        val, er = integrate_adaptive(f, [0.0, 0.5 * math.pi, math.pi], rel_tol=settings.rel_tol * 1e-2,
                                     max_depth=settings.max_subdivision_depth)
        out[i] = k * e.charge * val
        err[i] = er / max(abs(val), 1e-300)
    return out, err


def _gaussian_ball_quadrature(e, d, settings, k):
    """Shell-theorem radial integrals of the Gaussian profile."""
    s = e.width
    rho = lambda x: np.exp(-0.5 * x * x / s**2) / ((2 * math.pi) ** 1.5 * s**3)
    cut = 40.0 * s
    out = np.empty_like(d)
    err = np.empty_like(d)
    for i, di in enumerate(d):
        inner = outer = 0.0
        e_in = e_out = 0.0
        if di > 0:
            inner, e_in = integrate_adaptive(lambda x: rho(x) * x * x, [0.0, di],
                                             rel_tol=settings.rel_tol * 1e-2)
        if di < cut:
            outer, e_out = integrate_adaptive(lambda x: rho(x) * x, [di, max(di, 0.0) + cut],
                                              rel_tol=settings.rel_tol * 1e-2)
        val = (inner / di if di > 0 else 0.0) + outer
        out[i] = 4 * math.pi * k * e.charge * val
        err[i] = (e_in / max(di, 1e-300) + e_out) / max(abs(val), 1e-300)
    return out, err


def _element_scalar(e, pts, settings, k):
    if isinstance(e, PointCharge):
        d = np.linalg.norm(pts - e.position, axis=1)
        return k * e.charge / d, np.zeros_like(d)
    if isinstance(e, GaussianChargeBall):
        d = np.linalg.norm(pts - e.center, axis=1)
        if settings.force_quadrature:
            return _gaussian_ball_quadrature(e, d, settings, k)
        s = e.width
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.where(d > 1e-8 * s, erf(d / (math.sqrt(2) * s)) / d, math.sqrt(2 / math.pi) / s)
        return k * e.charge * v, np.zeros_like(d)
    if isinstance(e, ChargedShell):
        d = np.linalg.norm(pts - e.center, axis=1)
        if settings.force_quadrature:
            return _shell_quadrature(e, d, settings, k)
        return k * e.charge / np.maximum(d, e.radius), np.zeros_like(d)
    raise TypeError(f"no scalar potential for {e.kind}")


def scalar_potential_array(config, points, times, settings=DEFAULT_SETTINGS):
    """V at many (point, time) pairs.  Returns ``(V, relative_error)`` arrays."""
    pts, ts = _points_times(points, times)
    k = 1.0 / (4 * math.pi * config.constants.eps0)
    V = np.zeros(pts.shape[0])
    err = np.zeros(pts.shape[0])
    for e in config.charges():
        amp = np.asarray(e.amplitude(ts), dtype=float)
        live = amp != 0
        if not live.any():
            continue
        p = pts[live]
        if e.singular:
            e.check_outside(p)
        v, er = _element_scalar(e, p, settings, k)
        V[live] += amp[live] * v
        err[live] = np.maximum(err[live], er)
    return V, err


# ---------------------------------------------------------------------------
# vector potential

def _filament_tables(e):
    """Stacked GK15 nodes of every filament of an element, current folded into weights."""
    cache = e.__dict__.get("_filament_tables")
    if cache is None:
        xs, wks, wgs = [], [], []
        for fil, current in e.filaments():
            x, dx, wk, wg = fil.gk_nodes()
            xs.append(x)
            wks.append(current * wk[:, None] * dx)
            wgs.append(current * wg[:, None] * dx)
        cache = (np.concatenate(xs), np.concatenate(wks), np.concatenate(wgs))
        e.__dict__["_filament_tables"] = cache
    return cache


def _filament_adaptive(e, point, settings):
    total = np.zeros(3)
    err = 0.0
    for fil, current in e.filaments():
        def f(u):
            d = np.linalg.norm(point - fil.position(u), axis=1)
            return current * fil.derivative(u) / d[:, None]
        val, er = integrate_adaptive(f, fil.segment_edges(), rel_tol=settings.rel_tol,
                                     max_depth=settings.max_subdivision_depth)
        total += val
        err += er
    return total, err


def _filament_vector(e, pts, settings, k):
    x, wk, wg = _filament_tables(e)
    absw = np.linalg.norm(wk, axis=1)
    A = np.empty((pts.shape[0], 3))
    err = np.empty(pts.shape[0])
    chunk = settings.point_chunk
    for lo in range(0, pts.shape[0], chunk):
        p = pts[lo:lo + chunk]
        d2 = np.zeros((p.shape[0], x.shape[0]))
        for c in range(3):
            d2 += (p[:, c, None] - x[None, :, c]) ** 2
        inv = 1.0 / np.sqrt(d2)
        ak = inv @ wk
        ag = inv @ wg
        l1 = inv @ absw
        er = np.max(np.abs(ak - ag), axis=1) / l1
        bad = np.nonzero(er > settings.rel_tol)[0]
        for i in bad:
            ak[i], ea = _filament_adaptive(e, p[i], settings)
            er[i] = ea / l1[i]
        A[lo:lo + chunk] = ak
        err[lo:lo + chunk] = er
    return k * A, err


def _element_vector(e, pts, settings, k):
    if isinstance(e, InfiniteSolenoid):
        rho, phi_hat = e.cylindrical(pts)
        mu0 = k * 4 * math.pi
        flux = mu0 * e.turns_per_meter * e.current * math.pi * e.radius**2
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = np.where(rho >= e.radius, flux / (2 * math.pi * rho),
                           0.5 * mu0 * e.turns_per_meter * e.current * rho)
        mag[rho == 0] = 0.0
        return mag[:, None] * phi_hat, np.zeros(pts.shape[0])
    if isinstance(e, (CurrentLoop, FiniteSolenoid, PolylineCurrent)):
        return _filament_vector(e, pts, settings, k)
    raise TypeError(f"no vector potential for {e.kind}")


def vector_potential_array(config, points, times, settings=DEFAULT_SETTINGS):
    """A at many (point, time) pairs.  Returns ``(A, relative_error)``."""
    pts, ts = _points_times(points, times)
    k = config.constants.mu0 / (4 * math.pi)
    A = np.zeros_like(pts)
    err = np.zeros(pts.shape[0])
    for e in config.currents():
        amp = np.asarray(e.amplitude(ts), dtype=float)
        live = amp != 0
        if not live.any():
            continue
        p = pts[live]
        e.check_outside(p)
        a, er = _element_vector(e, p, settings, k)
        A[live] += amp[live, None] * a
        err[live] = np.maximum(err[live], er)
    return A, err


def effective_scalar_potential(config, r, t, settings=DEFAULT_SETTINGS):
    r = np.asarray(r, dtype=float)
    V, err = scalar_potential_array(config, r[None], t, settings)
    return EffectiveFieldSample(r, float(t), float(V[0]), np.zeros(3), (float(err[0]), 0.0))


def effective_vector_potential(config, r, t, settings=DEFAULT_SETTINGS):
    r = np.asarray(r, dtype=float)
    A, err = vector_potential_array(config, r[None], t, settings)
    return EffectiveFieldSample(r, float(t), 0.0, A[0], (0.0, float(err[0])))


def effective_potentials(config, r, t, settings=DEFAULT_SETTINGS):
    """Both potentials at one point."""
    r = np.asarray(r, dtype=float)
    V, ev = scalar_potential_array(config, r[None], t, settings)
    A, ea = vector_potential_array(config, r[None], t, settings)
    return EffectiveFieldSample(r, float(t), float(V[0]), A[0], (float(ev[0]), float(ea[0])))


# ---------------------------------------------------------------------------
# oracles

def circulation(config, loop, t, settings=DEFAULT_SETTINGS):
    """Line integral of A around a closed polyline (webers)."""
    loop = np.asarray(loop, dtype=float)
    if loop.ndim != 2 or loop.shape[0] < 3:
        raise OpenLoop("loop needs at least three vertices")
    if np.linalg.norm(loop[-1] - loop[0]) > CLOSURE_TOL:
        raise OpenLoop("loop is not closed")
    starts, edges = loop[:-1], np.diff(loop, axis=0)
    n = edges.shape[0]

    def f(u):
        i = np.minimum(np.floor(u).astype(int), n - 1)
        s = u - i
        pts = starts[i] + s[:, None] * edges[i]
        A, _ = vector_potential_array(config, pts, t, settings)
        return np.einsum("ij,ij->i", A, edges[i])

    # absolute floor from a coarse estimate of the integral of |A||dl|, for loops enclosing no flux
    u = (np.arange(n)[:, None] + (np.arange(16) + 0.5)[None, :] / 16).ravel()
    i = np.floor(u).astype(int)
    A, _ = vector_potential_array(config, starts[i] + (u - i)[:, None] * edges[i], t, settings)
    scale = float(np.sum(np.linalg.norm(A, axis=1) * np.linalg.norm(edges[i], axis=1)) / 16)
    rel = min(settings.rel_tol, 1e-12)
    val, err = integrate_adaptive(f, np.arange(n + 1, dtype=float), abs_tol=rel * scale, rel_tol=rel,
                                  max_depth=settings.max_subdivision_depth)
    return Estimate(float(val), float(err))


class KernelIdentity(NamedTuple):
    kspace: float
    exact: float
    k_values: tuple
    truncated: tuple
    residuals: tuple
    error: float


def _window(kind, k, k_max):
    if kind == "gaussian":
        return np.exp(-(k / k_max) ** 2)
    if kind == "sharp":
        return (k <= k_max).astype(float)
    raise ValueError(f"unknown window {kind!r}")


def window_extent(kind, k_max):
    """Wavenumber beyond which the window is negligible (< 1e-17)."""
    return k_max * (6.3 if kind == "gaussian" else 1.0)


def truncated_kernel(r, k_max, window="gaussian"):
    """(1 / (2 pi^2 r)) int_0^inf sin(k r)/k W(k/k_max) dk by composite Gauss-Legendre."""
    k_end = window_extent(window, k_max)
    width = min(0.5 * math.pi / r, k_end / 8)
    k, w = gauss_legendre_panels(0.0, k_end, width, order=16)
    return float(np.sum(w * np.sin(k * r) / k * _window(window, k, k_max)) / (2 * math.pi**2 * r))


def kernel_identity_check(r_magnitude, k_max, levels=4, window="gaussian"):
    """Truncated k-space integral of e^{ik.r}/((2 pi)^3 k^2) against 1/(4 pi r).

    The integral is reduced with the solid-angle identity to a radial sine
    integral, evaluated at ``k_max / 2^j`` (j = levels-1 .. 0) and Richardson
    extrapolated.
    """
    if not (r_magnitude > 0 and k_max > 0):
        raise ValueError("r_magnitude and k_max must be positive")
    ks = tuple(k_max / 2 ** j for j in range(levels - 1, -1, -1))
    vals = tuple(truncated_kernel(r_magnitude, k, window) for k in ks)
    exact = 1.0 / (4 * math.pi * r_magnitude)
    ext = richardson(np.array(vals))
    return KernelIdentity(float(ext.value), exact, ks, vals,
                          tuple(abs(v - exact) for v in vals), ext.error)


def electrostatic_energy(config, t, settings=DEFAULT_SETTINGS, n_radial=256, n_angular=16):
    """(1/2) int rho V d^3r by double real-space quadrature.

    The outer integral runs over each Gaussian ball in spherical coordinates
    about its centre; the inner potential is the general-path quadrature of
    the potentials module.  A ball's own potential is radial, so its self term
    needs radial nodes only; cross terms between balls use the closed-form
    potential on a full angular grid.
    """
    for e in config.charges():
        if isinstance(e, PointCharge) and e.amplitude(t) != 0:
            raise SelfEnergyDivergent("point charge self-energy diverges")
        if not isinstance(e, GaussianChargeBall):
            raise TypeError(f"electrostatic_energy supports Gaussian charge balls, not {e.kind}")
    inner = QuadratureSettings(settings.max_subdivision_depth, settings.rel_tol, force_quadrature=True)
    balls = [e for e in config.charges() if e.amplitude(t) != 0]
    x_t, w_t = np.polynomial.legendre.leggauss(n_angular)
    n_phi = 2 * n_angular
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    ct, ph = np.meshgrid(x_t, phi, indexing="ij")
    st = np.sqrt(1 - ct**2)
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], -1).reshape(-1, 3)
    wdir = np.repeat(w_t, n_phi) * (2 * math.pi / n_phi)
    total = 0.0
    for i, e in enumerate(balls):
        s = e.width
        r, wr = gauss_legendre_panels(0.0, 12 * s, 12 * s / max(1, n_radial // 16), order=16)
        own = SourceConfiguration((e,), config.constants)
        V, _ = scalar_potential_array(own, e.center + r[:, None] * np.array([0.0, 0.0, 1.0]), t, inner)
        V = 4 * math.pi * V
        others = [o for j, o in enumerate(balls) if j != i]
        if others:
            rest = SourceConfiguration(tuple(others), config.constants)
            pts = e.center + (r[:, None, None] * dirs[None]).reshape(-1, 3)
            Vo, _ = scalar_potential_array(rest, pts, t, settings)
            V = V + Vo.reshape(r.size, -1) @ wdir
        rho = e.amplitude(t) * e.charge * np.exp(-0.5 * r**2 / s**2) / ((2 * math.pi) ** 1.5 * s**3)
        total += 0.5 * np.sum(wr * r**2 * rho * V)
    return total


def magnetostatic_energy(config, t, tube_radius):
    """(1/2) int J.A d^3r for Gaussian-smeared filaments (tube width b).

    Double line quadrature with the smeared-pair kernel erf(D/2b)/(4 pi D),
    which stays finite at coincident points.  The error estimate compares the
    Kronrod and embedded Gauss weights.
    """
    if not tube_radius > 0:
        raise SelfEnergyDivergent("filament self-energy diverges without a tube radius")
    mu0 = config.constants.mu0
    xs, wk, wg = [], [], []
    for e in config.currents():
        if isinstance(e, InfiniteSolenoid):
            raise NonCompactSource("infinite solenoid has unbounded magnetic energy")
        amp = e.amplitude(t)
        for fil, current in e.filaments():
            x, dx, k_w, g_w = fil.gk_nodes()
            xs.append(x)
            wk.append(amp * current * k_w[:, None] * dx)
            wg.append(amp * current * g_w[:, None] * dx)
    if not xs:
        return Estimate(0.0, 0.0)
    x = np.concatenate(xs)
    wk = np.concatenate(wk)
    wg = np.concatenate(wg)
    b2 = 2.0 * tube_radius
    total_k = total_g = 0.0
    for lo in range(0, x.shape[0], 512):
        xi = x[lo:lo + 512]
        d = np.sqrt(sum((xi[:, c, None] - x[None, :, c]) ** 2 for c in range(3)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ker = np.where(d > 1e-12 * b2, erf(d / b2) / d, 2.0 / (math.sqrt(math.pi) * b2))
        total_k += np.sum((wk[lo:lo + 512] @ wk.T) * ker)
        total_g += np.sum((wg[lo:lo + 512] @ wg.T) * ker)
    scale = mu0 / (8 * math.pi)
    return Estimate(scale * total_k, abs(scale * (total_k - total_g)))
