"""Cross-validation suites shared by the CLI and the acceptance tests."""

import math

import numpy as np

from .constants import REDUCED, SI
from .errors import SelfEnergyDivergent
from .modespace import ground_energy_constant, lambda_current, reconstruct_potentials_kspace
from .potentials import (QuadratureSettings, circulation, effective_potentials, electrostatic_energy,
                         kernel_identity_check, magnetostatic_energy)
from .sources import (ChargedShell, CurrentLoop, FiniteSolenoid, GaussianChargeBall, InfiniteSolenoid,
                      PointCharge, SourceConfiguration, solenoid_flux)


def preset_sources(constants=REDUCED):
    """Compact sources used by the mode-space suites, as (name, configuration, centre, size)."""
    c = constants
    return [
        ("point_charge", SourceConfiguration((PointCharge(position=[0.1, 0.0, 0.0], charge=2.0),), c),
         np.array([0.1, 0.0, 0.0]), 0.0),
        ("gaussian_charge_ball", SourceConfiguration(
            (GaussianChargeBall(center=[0.0, 0.2, 0.0], charge=1.5, width=0.3),), c),
         np.array([0.0, 0.2, 0.0]), 0.3),
        ("charged_shell", SourceConfiguration((ChargedShell(center=[0.0, 0.0, 0.0], radius=0.5, charge=1.0),), c),
         np.zeros(3), 0.5),
        ("current_loop", SourceConfiguration(
            (CurrentLoop(center=[0.0, 0.0, 0.1], axis=[0.0, 0.6, 0.8], radius=0.5, current=1.0),), c),
         np.array([0.0, 0.0, 0.1]), 0.5),
        ("finite_solenoid", SourceConfiguration(
            (FiniteSolenoid(radius=0.2, length=1.0, turns_per_meter=20.0, current=1.0, n_loops=40),), c),
         np.zeros(3), 0.5),
    ]


def random_probes(rng, center, size, n, r_min=None, r_max=None):
    """Points on random directions at radii between ``r_min`` and ``r_max`` from ``center``."""
    r_min = r_min if r_min is not None else max(1.6 * size, 0.3)
    r_max = r_max if r_max is not None else r_min + 2.0
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return center + d * rng.uniform(r_min, r_max, n)[:, None]


def _relative(a, b):
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    scale = np.linalg.norm(b)
    if scale == 0:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a - b) / scale)


def kspace_agreement(config, probes, t=0.0, k_max=None, levels=3):
    """Worst relative difference between k-space and real-space potentials over probes."""
    worst_v = worst_a = 0.0
    for r in probes:
        ref = effective_potentials(config, r, t)
        if k_max is None:
            d = min(np.min(e.exclusion_distance(r)) if e.singular else
                    np.linalg.norm(r - e.center) for e in config.elements)
            kk = 32.0 / d
        else:
            kk = k_max
        ks = reconstruct_potentials_kspace(config, r, t, kk, levels=levels)
        if config.charges():
            worst_v = max(worst_v, _relative(ks.V, ref.V))
        if config.currents():
            worst_a = max(worst_a, _relative(ks.A, ref.A))
    return worst_v, worst_a


def longitudinal_ratio(config, n=64, seed=0, k_scale=10.0, t=0.0):
    """max_k |lambda_3| / max_j |lambda_j| at random wavevectors."""
    rng = np.random.default_rng(seed)
    k = rng.normal(size=(n, 3)) * k_scale
    lam = lambda_current(config, k, t)
    return float(np.max(np.abs(lam[:, 2]) / np.max(np.abs(lam), axis=1)))


def energy_constant_checks(k_ball=80.0, k_loop=400.0, tube_radius=0.02):
    """C against the real-space self-energies of a Gaussian ball and a small loop (reduced units)."""
    ball = SourceConfiguration((GaussianChargeBall(center=[0.0, 0.2, 0.0], charge=1.5, width=0.3),), REDUCED)
    c_ball = ground_energy_constant(ball, 0.0, k_ball)
    o_ball = electrostatic_energy(ball, 0.0)
    loop = SourceConfiguration((CurrentLoop(radius=0.5, current=1.0),), REDUCED)
    settings = QuadratureSettings(kernel_regularization=tube_radius)
    c_loop = ground_energy_constant(loop, 0.0, k_loop, settings)
    o_loop = -magnetostatic_energy(loop, 0.0, tube_radius).value
    try:
        ground_energy_constant(SourceConfiguration((PointCharge(charge=1.0),), REDUCED), 0.0, 10.0)
        divergent = False
    except SelfEnergyDivergent:
        divergent = True
    return {
        "gaussian_ball": {"C": c_ball.value, "oracle": o_ball, "rel_diff": abs(c_ball.value / o_ball - 1),
                          "extrapolation_error": c_ball.error},
        "current_loop": {"C": c_loop.value, "oracle": o_loop, "rel_diff": abs(c_loop.value / o_loop - 1),
                         "extrapolation_error": c_loop.error, "tube_radius": tube_radius},
        "point_charge_divergent": divergent,
    }


def modespace_report(n_probes=20, seed=0, constants=REDUCED):
    rng = np.random.default_rng(seed)
    agreement = {}
    for name, config, center, size in preset_sources(constants):
        probes = random_probes(rng, center, size, n_probes)
        v, a = kspace_agreement(config, probes)
        entry = {"max_rel_V": v, "max_rel_A": a}
        if config.currents():
            entry["lambda3_ratio"] = longitudinal_ratio(config, seed=seed)
        agreement[name] = entry
    return {"agreement": agreement, "energy_constant": energy_constant_checks()}


# ---------------------------------------------------------------------------
# convergence sweeps

def _orders(errors):
    out = []
    for e0, e1 in zip(errors[:-1], errors[1:]):
        out.append(math.log2(e0 / e1) if e0 > 0 and e1 > 0 else float("nan"))
    return out


def _square(half):
    return np.array([[-half, -half, 0], [half, -half, 0], [half, half, 0], [-half, half, 0], [-half, -half, 0]],
                    dtype=float)


def convergence_report(levels=4):
    """Resolution-doubling sweeps with observed convergence orders."""
    report = {}

    ks = [5.0 * 2**j for j in range(levels + 1)]
    kern = [kernel_identity_check(1.0, k, levels=3) for k in ks]
    residual = [abs(x.truncated[-1] - x.exact) for x in kern]
    report["kernel_identity"] = {"k_max": ks, "residual": residual, "order": _orders(residual),
                                 "extrapolated_rel_error": abs(kern[-1].kspace / kern[-1].exact - 1)}

    sol = InfiniteSolenoid(radius=0.01, turns_per_meter=1e5, current=1.0)
    cfg = SourceConfiguration((sol,), SI)
    flux = solenoid_flux(sol, 0.0).value
    tols = [10.0 ** -(2 * j + 2) for j in range(levels)]
    err = [abs(circulation(cfg, _square(0.02), 0.0, QuadratureSettings(rel_tol=tol)).value / flux - 1)
           for tol in tols]
    report["analytic_circulation"] = {"rel_tol": tols, "rel_error": err}

    geom = [(25 * 2**j, 32 * 2**j) for j in range(levels)]
    ferr = []
    for n_loops, n_seg in geom:
        fs = FiniteSolenoid(radius=0.01, length=1.0, turns_per_meter=1e5, current=1.0,
                            n_loops=n_loops, n_segments=n_seg)
        val = circulation(SourceConfiguration((fs,), SI), _square(0.015), 0.0,
                          QuadratureSettings(rel_tol=1e-8)).value
        ferr.append(abs(val / flux - 1))
    report["finite_solenoid_circulation"] = {"n_loops_segments": geom, "rel_error": ferr,
                                             "order": _orders(ferr)}

    loop = SourceConfiguration((CurrentLoop(radius=0.5, current=1.0),), REDUCED)
    r = np.array([0.9, 0.3, 0.4])
    ref = effective_potentials(loop, r, 0.0).A
    kk = [4.0 * 2**j for j in range(levels)]
    from .modespace import reconstruct_single
    kerr = [np.linalg.norm(reconstruct_single(loop, r, 0.0, k)[1] - ref) / np.linalg.norm(ref) for k in kk]
    report["kspace_reconstruction"] = {"k_max": kk, "rel_error": kerr, "order": _orders(kerr)}

    from .interferometer import PhaseSettings, build_magnetic_preset, phase_difference
    ptols = [10.0 ** -(2 * j + 3) for j in range(levels)]
    perr = []
    for tol in ptols:
        sc = build_magnetic_preset(1.3, constants=REDUCED, phase_settings=PhaseSettings(phase_tol=tol, phase_rel_tol=0))
        res = phase_difference(sc).hamiltonian
        perr.append(abs(res.delta - sc.metadata["expected_delta"]))
    report["magnetic_phase"] = {"phase_tol": ptols, "abs_error": perr}
    return report
