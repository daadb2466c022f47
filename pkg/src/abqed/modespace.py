"""Covariant mode-space layer: coherent amplitudes lambda_sigma(k), k-space
reconstruction of the effective potentials, the ground-energy constant C and
the effective gauge field built from mode functions.

Only c-number expectation values are represented.  The coherent ground state
enters through the substitutions a_sigma -> lambda_sigma, a_j^dag -> lambda_j^*
and a_0^dag -> -lambda_0^*.

Every k-integral is regularised by a spectral window W(|k| / k_max); the
default Gaussian window makes truncation errors smooth in k_max so that
Richardson extrapolation over k_max / 2^j is effective.
"""

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.special import erfc, erfcx, j1

from .errors import NonCompactSource, SelfEnergyDivergent, ZeroWavevector
from .potentials import DEFAULT_SETTINGS, EffectiveFieldSample, window_extent, _window
from .quadrature import gauss_legendre_panels, gk15_panels, richardson, romberg
from .sources import (ChargedShell, CircleFilament, CurrentLoop, FiniteSolenoid,
                      GaussianChargeBall, InfiniteSolenoid, PointCharge, PolylineCurrent)

SECTORS = (0, 1, 2, 3)


# ---------------------------------------------------------------------------
# polarization basis

class PolarizationBasis(NamedTuple):
    k_hat: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def vectors(self):
        """(n, 3, 3) array; ``[:, j-1, :]`` is epsilon_j."""
        return np.stack([self.e1, self.e2, self.e3], axis=1)


def polarization_basis(k):
    """e1 along z x k_hat (x x k_hat when k is along z), e2 = k_hat x e1, e3 = k_hat."""
    k = np.atleast_2d(np.asarray(k, dtype=float))
    norm = np.linalg.norm(k, axis=1)
    if np.any(norm == 0):
        raise ZeroWavevector("polarization basis undefined at k = 0")
    k_hat = k / norm[:, None]
    e1 = np.cross(np.array([0.0, 0.0, 1.0]), k_hat)
    n1 = np.linalg.norm(e1, axis=1)
    along_z = n1 < 1e-12
    if along_z.any():
        e1[along_z] = np.cross(np.array([1.0, 0.0, 0.0]), k_hat[along_z])
        n1[along_z] = np.linalg.norm(e1[along_z], axis=1)
    e1 /= n1[:, None]
    e2 = np.cross(k_hat, e1)
    return PolarizationBasis(k_hat, e1, e2, k_hat.copy())


# ---------------------------------------------------------------------------
# Fourier transforms of the sources

def _sinc(x):
    return np.sinc(x / math.pi)


def _check_k(k):
    k = np.atleast_2d(np.asarray(k, dtype=float))
    kn = np.linalg.norm(k, axis=1)
    if np.any(kn == 0):
        raise ZeroWavevector("amplitudes are undefined at k = 0")
    return k, kn


def charge_profile(e, kn):
    """Isotropic factor f(|k|) of an element with rho~(k) = f(|k|) exp(-i k.c)."""
    if isinstance(e, PointCharge):
        return np.full_like(kn, e.charge), e.position
    if isinstance(e, GaussianChargeBall):
        return e.charge * np.exp(-0.5 * (kn * e.width) ** 2), e.center
    if isinstance(e, ChargedShell):
        return e.charge * _sinc(kn * e.radius), e.center
    raise TypeError(f"{e.kind} carries no charge")


def charge_fourier(config, k, t):
    """rho~(k) = int rho(r) exp(-i k.r) d^3r of the instantaneous charge measure."""
    k, kn = _check_k(k)
    out = np.zeros(k.shape[0], dtype=complex)
    for e in config.charges():
        amp = e.amplitude(t)
        if amp == 0:
            continue
        f, c = charge_profile(e, kn)
        out += amp * f * np.exp(-1j * (k @ c))
    return out


def _circle_fourier_analytic(fil, k):
    """Line-measure transform of a unit-current circle: -2 pi i R J1(kappa R) phi_hat_k e^{-ik.c}."""
    a = fil.axis
    kpar = k @ a
    kperp = k - kpar[:, None] * a
    kappa = np.linalg.norm(kperp, axis=1)
    phi_hat = np.cross(a, kperp)
    nz = kappa > 0
    phi_hat[nz] /= kappa[nz, None]
    phi_hat[~nz] = 0.0
    amp = -2j * math.pi * fil.radius * j1(kappa * fil.radius) * np.exp(-1j * (k @ fil.center))
    return amp[:, None] * phi_hat


def _filament_fourier_quadrature(fil, k, per_radian=0.5):
    """int x'(u) exp(-i k.x(u)) du with GK15 panels subdivided to resolve the oscillation."""
    edges = fil.segment_edges()
    x_edges = fil.position(edges)
    seg_len = np.linalg.norm(np.diff(x_edges, axis=0), axis=1).max()
    kmax = np.linalg.norm(k, axis=1).max()
    sub = max(1, int(math.ceil(kmax * seg_len / per_radian / 15.0)))
    fine = np.concatenate([np.linspace(a, b, sub + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
                          + [edges[-1:]])
    u, wk, _ = gk15_panels(fine[:-1], fine[1:])
    u = u.ravel()
    x = fil.position(u)
    dx = fil.derivative(u) * wk.ravel()[:, None]
    out = np.empty((k.shape[0], 3), dtype=complex)
    for lo in range(0, k.shape[0], 256):
        ph = np.exp(-1j * (k[lo:lo + 256] @ x.T))
        out[lo:lo + 256] = ph @ dx
    return out


def current_fourier(config, k, t, method="analytic", tube_radius=0.0):
    """J~(k) of all current elements; ``method="quadrature"`` forces line quadrature for circles."""
    k, kn = _check_k(k)
    out = np.zeros((k.shape[0], 3), dtype=complex)
    for e in config.currents():
        if isinstance(e, InfiniteSolenoid):
            raise NonCompactSource("infinite solenoid has no square-integrable Fourier transform")
        amp = e.amplitude(t)
        if amp == 0:
            continue
        for fil, current in e.filaments():
            if isinstance(fil, CircleFilament) and method == "analytic":
                out += amp * current * _circle_fourier_analytic(fil, k)
            else:
                out += amp * current * _filament_fourier_quadrature(fil, k)
    if tube_radius > 0:
        out *= np.exp(-0.5 * (kn * tube_radius) ** 2)[:, None]
    return out


def mode_normalisation(kn, constants):
    """sqrt(hbar / (2 eps0 omega (2 pi)^3)) with omega = c |k|."""
    omega = constants.c * kn
    return np.sqrt(constants.hbar / (2 * constants.eps0 * omega * (2 * math.pi) ** 3))


def lambda_scalar(config, k, t):
    """lambda_0(k) = (c / hbar omega) N(k) rho~(k)."""
    k, kn = _check_k(k)
    const = config.constants
    omega = const.c * kn
    return const.c / (const.hbar * omega) * mode_normalisation(kn, const) * charge_fourier(config, k, t)


def lambda_current(config, k, t, basis=None, method="analytic", tube_radius=0.0):
    """(lambda_1, lambda_2, lambda_3) = N(k) (J~ . epsilon_j) / (hbar omega), shape (n, 3)."""
    k, kn = _check_k(k)
    const = config.constants
    if basis is None:
        basis = polarization_basis(k)
    J = current_fourier(config, k, t, method, tube_radius)
    proj = np.einsum("njc,nc->nj", basis.vectors(), J)
    omega = const.c * kn
    return (mode_normalisation(kn, const) / (const.hbar * omega))[:, None] * proj


# ---------------------------------------------------------------------------
# k-space integration helpers

def spherical_cubature(k_end, radial_width, n_theta, n_phi, radial_order=16):
    """Nodes and weights for int d^3k over the ball |k| <= k_end (product rule)."""
    kr, wr = gauss_legendre_panels(0.0, k_end, radial_width, order=radial_order)
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(1 - ct**2)
    dirs = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                     np.outer(ct, np.ones_like(phi))], -1).reshape(-1, 3)
    wdir = np.repeat(wt, n_phi) * (2 * math.pi / n_phi)
    return kr, wr, dirs, wdir


def _g_kz(kappa, z, K):
    """int_{-inf}^{inf} cos(k_z z) exp(-k_z^2/K^2) / (kappa^2 + k_z^2) dk_z, for kappa > 0.

    Closed form of the Gaussian-smoothed Lorentzian transform, written with
    erfcx to stay finite for large arguments.
    """
    z = np.abs(z)
    x1 = kappa / K + 0.5 * K * z
    x2 = kappa / K - 0.5 * K * z
    gauss = np.exp(-0.25 * (K * z) ** 2)
    t1 = erfcx(x1) * gauss
    with np.errstate(over="ignore"):
        t2 = np.where(x2 >= 0, erfcx(np.abs(x2)) * gauss,
                      erfc(x2) * np.exp(np.minimum((kappa / K) ** 2 - kappa * z, 700.0)))
    return 0.5 * math.pi / kappa * (t1 + t2)


def _extrapolate(values, window):
    """Gaussian-window errors of smooth sources expand in even powers of 1/k_max."""
    values = np.asarray(values)
    return romberg(values) if window == "gaussian" else richardson(values)


def _effective_cutoff(k_max, tube_radius):
    if tube_radius > 0:
        return 1.0 / math.sqrt(1.0 / k_max**2 + 0.5 * tube_radius**2)
    return k_max


def _loop_groups(elements, t):
    """Flatten circle-based current elements to (center, axis, radius, current) rows,
    or None if any element is not built from circles."""
    rows = []
    for e in elements:
        if not isinstance(e, (CurrentLoop, FiniteSolenoid)):
            return None
        amp = e.amplitude(t)
        for fil, current in e.filaments():
            rows.append((fil.center, fil.axis, fil.radius, current * amp))
    return rows


# ---------------------------------------------------------------------------
# reconstruction of the effective potentials

def _scalar_kspace(config, r, t, k_max, window):
    """<V(r)> = 2 Re c int d^3k N lambda_0 e^{ik.r}; isotropic factor + sinc reduction."""
    const = config.constants
    total = 0.0
    for e in config.charges():
        amp = e.amplitude(t)
        if amp == 0:
            continue
        e.check_outside(r)
        center = e.position if isinstance(e, PointCharge) else e.center
        d = float(np.linalg.norm(r - center))
        extent = d + (e.radius if isinstance(e, ChargedShell) else 0.0)
        k_end = window_extent(window, k_max)
        kn, w = gauss_legendre_panels(0.0, k_end, min(0.5 * math.pi / max(extent, 1e-300), k_end / 8))
        f, _ = charge_profile(e, kn)
        lam0 = const.c / (const.hbar * const.c * kn) * mode_normalisation(kn, const) * f
        integrand = 2 * const.c * 4 * math.pi * kn**2 * mode_normalisation(kn, const) * lam0 * _sinc(kn * d)
        total += amp * np.sum(w * integrand * _window(window, kn, k_max))
    return total


def _loop_vector_kspace(rows, r, k_max, mu0, tube_radius):
    """A from coaxial-loop transforms, azimuth and k_z integrated in closed form.

    Per loop frame: A_phi = (mu0 I R / 2 pi) int kappa J1(kappa R) J1(kappa rho) W g(kappa, dz) dkappa,
    where Sum_j epsilon_j lambda_j collapses to J~ by completeness of the triad.
    """
    K = _effective_cutoff(k_max, tube_radius)
    A = np.zeros(3)
    k_end = 6.3 * K
    # group rows by (axis, radius) and evaluate each loop in its own frame
    for center, axis, radius, current in rows:
        p = r - center
        z = p @ axis
        perp = p - z * axis
        rho = np.linalg.norm(perp)
        if rho == 0 or current == 0:
            continue
        width = min(0.5 * math.pi / (radius + rho), k_end / 8)
        kap, w = gauss_legendre_panels(0.0, k_end, width)
        integrand = kap * j1(kap * radius) * j1(kap * rho) * np.exp(-(kap / K) ** 2) * _g_kz(kap, z, K)
        a_phi = mu0 * current * radius / (2 * math.pi) * np.sum(w * integrand)
        A += a_phi * np.cross(axis, perp) / rho
    return A


def _stack_vector_kspace(e, amp, r, k_max, mu0, tube_radius):
    """Coaxial stack of equal loops: the k_z factor is summed over loop offsets."""
    K = _effective_cutoff(k_max, tube_radius)
    p = r - e.center
    z = p @ e.axis
    perp = p - z * e.axis
    rho = np.linalg.norm(perp)
    if rho == 0:
        return np.zeros(3)
    k_end = 6.3 * K
    width = min(0.5 * math.pi / (e.radius + rho), k_end / 8)
    kap, w = gauss_legendre_panels(0.0, k_end, width)
    g = np.zeros_like(kap)
    for dz in z - e.loop_offsets:
        g += _g_kz(kap, dz, K)
    integrand = kap * j1(kap * e.radius) * j1(kap * rho) * np.exp(-(kap / K) ** 2) * g
    a_phi = mu0 * amp * e.loop_current * e.radius / (2 * math.pi) * np.sum(w * integrand)
    return a_phi * np.cross(e.axis, perp) / rho


def _vector_kspace_general(config, e, amp, r, k_max, window, tube_radius):
    """A from the filament transforms with the solid angle integrated in closed form.

    Sum_j epsilon_j lambda_j collapses to J~, and the angular integral of
    e^{ik.(r - x)} over each line node gives 4 pi sinc(k|r - x|), leaving a
    radial k quadrature per node.
    """
    k_end = window_extent(window, k_max)
    out = np.zeros(3)
    for fil, current in e.filaments():
        x, dx, wk, _ = fil.gk_nodes()
        R = np.linalg.norm(r - x, axis=1)
        width = min(0.5 * math.pi / R.max(), k_end / 8)
        kn, w = gauss_legendre_panels(0.0, k_end, width)
        W = _window(window, kn, k_max) * np.exp(-0.5 * (kn * tube_radius) ** 2)
        radial = _sinc(np.outer(R, kn)) @ (w * W)
        out += current * (wk * radial) @ dx
    return amp * config.constants.mu0 * 4 * math.pi / (2 * math.pi) ** 3 * out


def vector_kspace_cubature(config, r, t, k_max, window="gaussian", tube_radius=0.0, n_angle=None):
    """Full spherical cubature of Re int mu0 J~ e^{ik.r} W / ((2 pi)^3 k^2) d^3k.

    Slow; an independent check of the angular reductions at modest k_max.
    """
    r = np.asarray(r, dtype=float)
    extent = max(np.max(np.linalg.norm(fil.gk_nodes()[0] - r, axis=1))
                 for e in config.currents() for fil, _ in e.filaments())
    k_end = window_extent(window, k_max)
    L = int(math.ceil(k_end * extent)) + 12 if n_angle is None else n_angle
    kr, wr, dirs, wdir = spherical_cubature(k_end, 0.5 * math.pi / extent, L // 2 + 8, L + 8)
    total = np.zeros(3)
    for kk, ww in zip(kr, wr):
        kv = kk * dirs
        J = current_fourier(config, kv, t, tube_radius=tube_radius)
        ph = np.exp(1j * (kv @ r))
        total += np.real((wdir * ph) @ J) * ww * _window(window, kk, k_max)
    return config.constants.mu0 / (2 * math.pi) ** 3 * total


def reconstruct_single(config, r, t, k_max, window="gaussian", tube_radius=0.0):
    """One window level of the k-space reconstruction: returns (V, A)."""
    r = np.asarray(r, dtype=float)
    V = _scalar_kspace(config, r, t, k_max, window)
    A = np.zeros(3)
    mu0 = config.constants.mu0
    for e in config.currents():
        if isinstance(e, InfiniteSolenoid):
            raise NonCompactSource("infinite solenoid has no square-integrable Fourier transform")
        amp = e.amplitude(t)
        if amp == 0:
            continue
        e.check_outside(r)
        if window != "gaussian" and not isinstance(e, PolylineCurrent):
            raise ValueError("loop reconstruction supports only the Gaussian window")
        if isinstance(e, CurrentLoop):
            A += _loop_vector_kspace([(e.center, e.axis, e.radius, amp * e.current)], r, k_max, mu0, tube_radius)
        elif isinstance(e, FiniteSolenoid):
            A += _stack_vector_kspace(e, amp, r, k_max, mu0, tube_radius)
        else:
            A += _vector_kspace_general(config, e, amp, r, k_max, window, tube_radius)
    return V, A


def reconstruct_potentials_kspace(config, r, t, k_max, settings=DEFAULT_SETTINGS, levels=3,
                                  window="gaussian"):
    """Expectation values <V>, <A> assembled from the coherent amplitudes.

    Evaluated at window scales k_max / 2^j, j = levels-1 .. 0, and Richardson
    extrapolated; ``est_error`` holds the relative extrapolation error.
    """
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    r = np.asarray(r, dtype=float)
    ks = [k_max / 2**j for j in range(levels - 1, -1, -1)]
    vals = [reconstruct_single(config, r, t, k, window, settings.kernel_regularization) for k in ks]
    Vs = np.array([v[0] for v in vals])
    As = np.array([v[1] for v in vals])
    ev = _extrapolate(Vs, window)
    ea = _extrapolate(As, window)
    V = float(ev.value)
    A = np.asarray(ea.value, dtype=float)
    rel_v = ev.error / max(abs(V), 1e-300) if V != 0 else ev.error
    nA = np.linalg.norm(A)
    rel_a = ea.error / nA if nA > 0 else ea.error
    return EffectiveFieldSample(r, float(t), V, A, (float(rel_v), float(rel_a)))


# ---------------------------------------------------------------------------
# ground-energy constant

class EnergyConstant(NamedTuple):
    value: float
    error: float
    electric: float
    magnetic: float
    k_values: tuple
    sequence: tuple


def _electric_constant(config, t, k_max, window):
    """Sum_ij 4 pi int k^2 lambda0_i lambda0_j hbar omega sinc(k d_ij) W dk."""
    const = config.constants
    elems = [(e, e.amplitude(t)) for e in config.charges()]
    elems = [(e, a) for e, a in elems if a != 0]
    if not elems:
        return 0.0
    centers = [e.position if isinstance(e, PointCharge) else e.center for e, _ in elems]
    sizes = [getattr(e, "width", 0.0) or getattr(e, "radius", 0.0) for e, _ in elems]
    k_end = window_extent(window, k_max)
    if all(isinstance(e, GaussianChargeBall) for e, _ in elems):
        # Gaussian profiles are negligible beyond k = 40 / width
        k_end = min(k_end, 40.0 / min(sizes))
    spread = max(np.linalg.norm(ci - cj) for ci in centers for cj in centers) + 2 * max(sizes)
    kn, w = gauss_legendre_panels(0.0, k_end, min(0.5 * math.pi / max(spread, 1e-300), k_end / 32))
    omega = const.c * kn
    norm = mode_normalisation(kn, const)
    lam = [a * const.c / (const.hbar * omega) * norm * charge_profile(e, kn)[0] for e, a in elems]
    total = 0.0
    win = _window(window, kn, k_max)
    for i, li in enumerate(lam):
        for j, lj in enumerate(lam):
            d = np.linalg.norm(centers[i] - centers[j])
            total += np.sum(w * 4 * math.pi * kn**2 * li * lj * const.hbar * omega * _sinc(kn * d) * win)
    return float(total)


def _magnetic_constant_loops(rows, k_max, mu0, tube_radius):
    """(mu0/2) int kappa e^{-kappa^2/K^2} Sum_ij I_i R_i J1_i I_j R_j J1_j g(kappa, dz_ij) dkappa
    for loops sharing one axis line."""
    # |J~|^2 carries the tube factor twice
    K = 1.0 / math.sqrt(1.0 / k_max**2 + tube_radius**2)
    radii = np.array([row[2] for row in rows])
    k_end = 6.3 * K
    axis = rows[0][1]
    z = np.array([(row[0] - rows[0][0]) @ axis for row in rows])
    span = radii.max() * 2 + (z.max() - z.min())
    kap, w = gauss_legendre_panels(0.0, k_end, min(0.5 * math.pi / span, k_end / 32))
    amps = np.array([row[3] * row[2] for row in rows])[:, None] * j1(kap[None, :] * radii[:, None])
    total = np.zeros_like(kap)
    for i in range(len(rows)):
        for j in range(len(rows)):
            total += amps[i] * amps[j] * _g_kz(kap, z[i] - z[j], K)
    return float(0.5 * mu0 * np.sum(w * kap * np.exp(-(kap / K) ** 2) * total))


def _coaxial(rows):
    c0, a0 = rows[0][0], rows[0][1]
    for c, a, _, _ in rows:
        if abs(abs(a @ a0) - 1) > 1e-12:
            return False
        d = c - c0
        if np.linalg.norm(d - (d @ a0) * a0) > 1e-12:
            return False
    return True


def _magnetic_constant_general(config, t, k_max, window, tube_radius, n_angle=None):
    """Spherical cubature of Sum_j |lambda_j|^2 hbar omega W."""
    const = config.constants
    pts = []
    for e in config.currents():
        for fil, _ in e.filaments():
            pts.append(fil.position(np.linspace(0, fil.u_max, 33)))
    pts = np.concatenate(pts)
    extent = np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1))
    k_end = window_extent(window, k_max)
    if tube_radius > 0:
        k_end = min(k_end, 6.3 / tube_radius)
    L = int(math.ceil(2 * k_end * extent)) + 12 if n_angle is None else n_angle
    kr, wr, dirs, wdir = spherical_cubature(k_end, 0.25 * math.pi / extent, L // 2 + 8, L + 8)
    total = 0.0
    for kk, ww in zip(kr, wr):
        kv = kk * dirs
        lam = lambda_current(config, kv, t, tube_radius=tube_radius)
        s = np.sum(np.abs(lam) ** 2, axis=1) * const.hbar * const.c * kk
        total += ww * kk**2 * (wdir @ s) * _window(window, kk, k_max)
    return float(total)


def ground_energy_single(config, t, k_max, window="gaussian", tube_radius=0.0, method="auto"):
    """C at one window level: returns (electric part, magnetic part)."""
    electric = _electric_constant(config, t, k_max, window)
    currents = list(config.currents())
    magnetic = 0.0
    if currents:
        if any(isinstance(e, InfiniteSolenoid) for e in currents):
            raise NonCompactSource("infinite solenoid has unbounded magnetic energy")
        rows = _loop_groups(currents, t)
        if method == "auto" and rows is not None and window == "gaussian" and _coaxial(rows):
            magnetic = _magnetic_constant_loops(rows, k_max, config.constants.mu0, tube_radius)
        else:
            magnetic = _magnetic_constant_general(config, t, k_max, window, tube_radius)
    return electric, magnetic


def ground_energy_constant(config, t, k_max, settings=DEFAULT_SETTINGS, levels=4,
                           window="gaussian", allow_divergent=False):
    """C = int d^3k [|lambda_0|^2 - Sum_j |lambda_j|^2] hbar omega.

    Point charges, and filament currents without a tube radius
    (``settings.kernel_regularization``), make C diverge; they raise
    :class:`SelfEnergyDivergent` unless ``allow_divergent`` is set, in which
    case the windowed value at ``k_max`` is returned without extrapolation.
    """
    tube = settings.kernel_regularization
    divergent = any(isinstance(e, PointCharge) and e.amplitude(t) != 0 for e in config.charges())
    divergent |= tube == 0 and any(e.amplitude(t) != 0 for e in config.currents())
    if divergent and not allow_divergent:
        raise SelfEnergyDivergent("ground-energy constant diverges for point-like sources")
    if divergent:
        el, mag = ground_energy_single(config, t, k_max, window, tube)
        return EnergyConstant(el - mag, float("inf"), el, mag, (k_max,), (el - mag,))
    ks = [k_max / 2**j for j in range(levels - 1, -1, -1)]
    parts = np.array([ground_energy_single(config, t, k, window, tube) for k in ks])
    # a shell's sinc profile leaves a 1/k_max tail, which the even-power series cannot absorb
    shells = any(isinstance(e, ChargedShell) and e.amplitude(t) != 0 for e in config.charges())
    el = richardson(parts[:, 0]) if shells else _extrapolate(parts[:, 0], window)
    mag = _extrapolate(parts[:, 1], window)
    value = float(el.value - mag.value)
    return EnergyConstant(value, el.error + mag.error, float(el.value), float(mag.value),
                          tuple(ks), tuple(parts[:, 0] - parts[:, 1]))


# ---------------------------------------------------------------------------
# effective gauge field from mode functions

@dataclass(frozen=True)
class ModeFunctions:
    """Gauge mode functions f_sigma(k, t).

    ``f(sigma, k, t)`` returns complex values for an ``(n, 3)`` array of
    wavevectors.  ``k_support`` bounds the spectrum used by the cubature;
    ``df_dt`` gives the time derivative (central differences otherwise).
    """

    f: Callable
    sectors: tuple = (0,)
    k_support: Optional[float] = None
    df_dt: Optional[Callable] = None
    static: bool = False


class GaugeModeSample(NamedTuple):
    value: float
    gradient: np.ndarray
    time_derivative: float
    imag_residue: float


def _mode_integrals(modes, config, r, t, k_max, window, derivative=False):
    r = np.asarray(r, dtype=float)
    extent = np.linalg.norm(r)
    for e in config.elements:
        c = getattr(e, "position", getattr(e, "center", np.zeros(3)))
        extent = max(extent, np.linalg.norm(r - c) + getattr(e, "radius", 0.0), np.linalg.norm(c))
    extent = max(extent, 1e-12)
    k_end = window_extent(window, k_max)
    if modes.k_support is not None:
        k_end = min(k_end, modes.k_support)
    L = int(math.ceil(k_end * extent)) + 12
    kr, wr, dirs, wdir = spherical_cubature(k_end, 0.5 * math.pi / extent, L // 2 + 8, L + 8)
    value = 0j
    grad = np.zeros(3, dtype=complex)
    for kk, ww in zip(kr, wr):
        kv = kk * dirs
        ph = np.exp(1j * (kv @ r)) * wdir * ww * kk**2 * _window(window, kk, k_max)
        acc = np.zeros(kv.shape[0], dtype=complex)
        lam_j = None
        for sigma in modes.sectors:
            fv = (modes.df_dt if derivative else modes.f)(sigma, kv, t)
            if sigma == 0:
                lam = lambda_scalar(config, kv, t)
            else:
                if lam_j is None:
                    lam_j = lambda_current(config, kv, t)
                lam = lam_j[:, sigma - 1]
            acc += fv * lam
        value += np.sum(acc * ph)
        grad += (1j * kv.T) @ (acc * ph)
    return value, grad


def effective_gauge_from_modes(modes, config, r, t, k_max, settings=DEFAULT_SETTINGS, window="gaussian",
                               levels=3, dt=1e-6):
    """F(r, t) = Sum_sigma int d^3k f_sigma lambda_sigma e^{ik.r} + c.c., with its gradient
    and time derivative, Richardson extrapolated over the window scale."""
    ks = [k_max / 2**j for j in range(levels - 1, -1, -1)]
    vals, grads, dts = [], [], []
    residue = 0.0
    for k in ks:
        v, g = _mode_integrals(modes, config, r, t, k, window)
        full = v + np.conj(v)
        gfull = g + np.conj(g)
        residue = max(residue, abs(full.imag) / max(abs(full.real), 1e-300),
                      float(np.max(np.abs(gfull.imag))) / max(float(np.max(np.abs(gfull.real))), 1e-300))
        vals.append(full.real)
        grads.append(gfull.real)
        if modes.static:
            dts.append(0.0)
        elif modes.df_dt is not None:
            d, _ = _mode_integrals(modes, config, r, t, k, window, derivative=True)
            dts.append(2 * d.real)
        else:
            vp, _ = _mode_integrals(modes, config, r, t + dt, k, window)
            vm, _ = _mode_integrals(modes, config, r, t - dt, k, window)
            dts.append((2 * vp.real - 2 * vm.real) / (2 * dt))
    return GaugeModeSample(float(_extrapolate(vals, window).value),
                           np.asarray(_extrapolate(grads, window).value, dtype=float),
                           float(_extrapolate(dts, window).value), residue)
