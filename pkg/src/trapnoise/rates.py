"""Heating, loss and decoherence rates, plus a population evolver for the trap ladder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .angular import AXES, SpinSystem, hyperfine_matrix_element_sq_avg, zeeman_matrix_element, _twice
from .constants import HBAR, MU_B
from .nearfield import (
    DiagonalSpectrumTensor,
    EvaluationMethod,
    SpectrumKind,
    SurfaceGeometry,
    blackbody_force_gradient_zz,
    electric_nearfield_spectrum,
    force_gradient_spectrum_zz,
    magnetic_nearfield_spectrum,
)
from .physical import Material, ThermalEnvironment, blackbody_magnetic_spectrum

E_Z = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class TrapConfig:
    """One trap degree of freedom at height ``distance`` above the surface.

    ``charge`` is set for ions; neutral particles couple through a
    :class:`SpinSystem` passed to the rate functions instead.
    """

    omega_trap: float
    mass: float
    distance: float
    axis: tuple = E_Z
    charge: float | None = None
    theta: float = 0.0

    def __post_init__(self):
        if not self.omega_trap > 0:
            raise ValueError("omega_trap must be > 0")
        if not self.mass > 0:
            raise ValueError("mass must be > 0")
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-9:
            raise ValueError(f"axis must be a unit 3-vector, got {self.axis!r}")
        SurfaceGeometry(self.distance)

    @property
    def ground_state_size(self) -> float:
        return math.sqrt(HBAR / (2 * self.mass * self.omega_trap))

    @property
    def geometry(self) -> SurfaceGeometry:
        return SurfaceGeometry(self.distance)


@dataclass(frozen=True)
class RateResult:
    rate: float  # 1/s
    method: EvaluationMethod
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be finite and >= 0, got {self.rate!r}")

    @property
    def rel_err(self) -> float:
        return self.components.get("rel_err", 0.0)


def gamma(trap: TrapConfig, spectrum_tensor_at, omega_signed: float) -> float:
    """Transition rate ``(a/hbar)^2 sum_ij n_i n_j S_F^ij(w)``.

    ``spectrum_tensor_at(w)`` returns the field spectrum; electric spectra are
    converted to force spectra with the trap charge.
    """
    spec = spectrum_tensor_at(omega_signed)
    if spec.kind is SpectrumKind.ELECTRIC:
        if trap.charge is None:
            raise ValueError("electric-field coupling needs a charged particle")
        force = trap.charge**2 * spec.project(trap.axis)
    elif spec.kind is SpectrumKind.FORCE_GRADIENT_ZZ:
        if not np.allclose(trap.axis, E_Z):
            raise ValueError("force-gradient spectrum only covers a vertical trap axis")
        force = spec.perpendicular
    else:
        raise ValueError("a magnetic field spectrum is not a force; use force_gradient_spectrum_zz")
    return trap.ground_state_size**2 / HBAR**2 * force


def coherence_decay_rate(gamma_plus: float, gamma_minus: float) -> float:
    if gamma_plus < 0 or gamma_minus < 0:
        raise ValueError("rates must be >= 0")
    return 0.5 * (gamma_plus + gamma_minus)


def ion_heating_rate(trap: TrapConfig, material: Material, env: ThermalEnvironment,
                     method="auto", include_blackbody=False) -> RateResult:
    """Ground-state depletion rate of a trapped charge (field spectrum at ``-Omega``)."""
    geom = trap.geometry
    seen = {}

    def spectrum_at(w):
        seen[w] = electric_nearfield_spectrum(material, env, geom, w, method=method,
                                              include_blackbody=include_blackbody)
        return seen[w]

    w = -trap.omega_trap
    rate = gamma(trap, spectrum_at, w)
    spec = seen[w]
    return RateResult(rate, spec.method, {
        "S_E_parallel": spec.parallel,
        "S_E_perp": spec.perpendicular,
        "ground_state_size": trap.ground_state_size,
        "rel_err": spec.rel_err,
        **spec.notes,
    })


def spin_heating_rate(trap: TrapConfig, material: Material, env: ThermalEnvironment,
                      spin: SpinSystem, m_s=None, method="asymptotic",
                      include_blackbody=False, normalization="closed_form") -> RateResult:
    """Heating of a trapped magnetic moment by the fluctuating Zeeman force.

    With ``normalization="closed_form"`` (default) the rate is
    ``S_F / (hbar M Omega)``, which for ``z << delta`` is the well-known
    ``mu0^2 kT mu_B^2 g_S^2 / (64 pi hbar Omega M rho z^3)``.  This is twice
    the golden-rule value ``(a/hbar)^2 S_F``, which ``"golden_rule"`` selects
    and which is always reported as ``rate_golden_rule``.

    The free-space contribution is always evaluated and reported in the
    components as ``blackbody_rate``; it is added to the rate only on request.
    """
    if normalization not in ("closed_form", "golden_rule"):
        raise ValueError(f"unknown normalization {normalization!r}")
    mu_sq, mu3_sq = (x * MU_B**2 for x in spin.mu_sq_expect(m_s))
    geom = trap.geometry
    w = -trap.omega_trap
    factor = 2.0 if normalization == "closed_form" else 1.0

    spec = force_gradient_spectrum_zz(material, env, geom, w, mu_sq, mu3_sq,
                                      axis=trap.axis, method=method,
                                      include_blackbody=include_blackbody)
    golden = gamma(trap, lambda _: spec, w)
    bb_rate = factor * (trap.ground_state_size**2 / HBAR**2
                        * blackbody_force_gradient_zz(env, w, mu_sq, mu3_sq))
    return RateResult(factor * golden, spec.method, {
        "S_F_zz": spec.perpendicular,
        "mu_sq": mu_sq,
        "mu3_sq": mu3_sq,
        "rate_golden_rule": golden,
        "blackbody_rate": bb_rate,
        "normalization": normalization,
        "rel_err": spec.rel_err,
        **spec.notes,
    })


def _loss_rate(weights, omega_fi, material, env, geom, method, spin):
    """``(g_S mu_B / hbar)^2 sum_a |<f|S_a|i>|^2 S_B^aa(-w_fi)`` incl. free-space field."""
    spec = magnetic_nearfield_spectrum(material, env, geom, -omega_fi, method=method,
                                       include_blackbody=True)
    s_aa = {"x": spec.parallel, "y": spec.parallel, "z": spec.perpendicular}
    pref = (spin.g_S * MU_B / HBAR) ** 2
    rate = pref * sum(weights[a] * s_aa[a] for a in AXES)
    bb_rate = pref * blackbody_magnetic_spectrum(env, -omega_fi) * sum(weights.values())
    return RateResult(rate, spec.method, {
        "S_B_parallel": spec.parallel,
        "S_B_perp": spec.perpendicular,
        "matrix_elements_sq": dict(weights),
        "blackbody_rate": bb_rate,
        "rel_err": spec.rel_err,
        **spec.notes,
    })


def zeeman_loss_rate(spin: SpinSystem, omega_L: float, material: Material,
                     env: ThermalEnvironment, geom: SurfaceGeometry, theta: float,
                     m_i=None, m_f=None, method="auto") -> RateResult:
    """Spin-flip loss rate between Zeeman sublevels in a magnetic trap.

    Defaults to ``m_i = -S -> m_f = m_i + 1``.  Sublevel energies are taken as
    ``hbar omega_L m``, so the spectrum is sampled at ``-omega_L (m_f - m_i)``.
    """
    if not omega_L > 0:
        raise ValueError("Larmor frequency must be > 0")
    if not 0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    s = spin.S
    mi = -_twice(s) / 2 if m_i is None else m_i
    mf = mi + 1 if m_f is None else m_f
    weights = {a: abs(zeeman_matrix_element(s, mf, mi, a, theta)) ** 2 for a in AXES}
    omega_fi = omega_L * (mf - mi)
    if omega_fi == 0:
        raise ValueError("initial and final sublevels coincide")
    return _loss_rate(weights, omega_fi, material, env, geom, method, spin)


def hyperfine_loss_rate(spin: SpinSystem, omega_HF: float, material: Material,
                        env: ThermalEnvironment, geom: SurfaceGeometry,
                        F_i, F_f, method="auto") -> RateResult:
    """Loss rate between hyperfine manifolds, m-averaged, all at one splitting.

    ``F_f > F_i`` is taken as the upper manifold (positive hyperfine constant).
    """
    if not omega_HF > 0:
        raise ValueError("hyperfine splitting must be > 0")
    if F_i == F_f:
        raise ValueError("F_i and F_f must differ")
    weights = {a: hyperfine_matrix_element_sq_avg(spin.S, spin.I, F_f, F_i, a) for a in AXES}
    omega_fi = omega_HF if F_f > F_i else -omega_HF
    return _loss_rate(weights, omega_fi, material, env, geom, method, spin)


# -- population dynamics ------------------------------------------------------

TRUNCATION_LIMIT = 1e-6


class TruncationError(RuntimeError):
    """The top level of the truncated ladder became populated."""


@dataclass(frozen=True)
class LadderState:
    populations: np.ndarray
    coherence_01: complex = 0j
    clamped: bool = False

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.ndim != 1 or len(p) < 2:
            raise ValueError("need at least two ladder levels")
        if np.any(p < -1e-12):
            raise ValueError("populations must be >= 0")
        if abs(p.sum() - 1) > 1e-9:
            raise ValueError(f"populations must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "populations", p)

    @classmethod
    def ground(cls, n_levels: int, coherence_01=0j):
        p = np.zeros(n_levels)
        p[0] = 1.0
        return cls(p, coherence_01)


def rate_matrix(n_levels: int, gamma_plus: float, gamma_minus: float) -> np.ndarray:
    """Generator ``A`` of ``dp/dt = A p`` on a ladder closed at the top level.

    Upward rate ``n -> n+1`` is ``gamma_minus (n+1)``, downward ``n -> n-1`` is
    ``gamma_plus n``; the top level has no upward channel so probability is
    conserved exactly.
    """
    n = np.arange(n_levels, dtype=float)
    up = gamma_minus * (n[:-1] + 1)
    down = gamma_plus * n[1:]
    a = np.diag(up, -1) + np.diag(down, 1)
    a -= np.diag(a.sum(axis=0))
    return a


def max_stable_step(n_levels, gamma_plus, gamma_minus):
    fastest = max(gamma_minus, gamma_plus) * n_levels
    return math.inf if fastest == 0 else 0.01 / fastest


def evolve_populations(state: LadderState, gamma_plus: float, gamma_minus: float,
                       duration: float, dt: float | None = None,
                       check_every: int = 1000) -> LadderState:
    """Integrate the ladder rate equations with fixed-step RK4.

    ``rho_01`` relaxes at ``(gamma_plus + gamma_minus)/2``; its feeding from
    ``rho_12`` is not tracked.  Raises :class:`TruncationError` when the top
    level exceeds ``1e-6``.  Populations below ``-1e-12`` are clamped and the
    returned state is flagged ``clamped``.
    """
    if gamma_plus < 0 or gamma_minus < 0:
        raise ValueError("rates must be >= 0")
    if duration < 0:
        raise ValueError("duration must be >= 0")
    p = state.populations.copy()
    n_levels = len(p)
    limit = max_stable_step(n_levels, gamma_plus, gamma_minus)
    if dt is None:
        dt = min(limit, duration) if duration > 0 else 1.0
    elif dt > limit * (1 + 1e-12):
        raise ValueError(f"dt = {dt:g} exceeds the stability limit {limit:g}")
    n_steps = int(math.ceil(duration / dt - 1e-9)) if duration > 0 else 0
    if n_steps:
        dt = duration / n_steps

    a = rate_matrix(n_levels, gamma_plus, gamma_minus)
    h = dt * a
    # one RK4 step of a linear system is multiplication by this polynomial in h
    step = np.eye(n_levels) + h @ (np.eye(n_levels) + h @ (np.eye(n_levels) / 2
                                   + h @ (np.eye(n_levels) / 6 + h / 24)))
    x = -0.5 * (gamma_plus + gamma_minus) * dt
    coh_step = 1 + x + x**2 / 2 + x**3 / 6 + x**4 / 24

    clamped = state.clamped
    done = 0
    while done < n_steps:
        chunk = min(check_every, n_steps - done)
        for _ in range(chunk):
            p = step @ p
        done += chunk
        if p[-1] >= TRUNCATION_LIMIT:
            raise TruncationError(
                f"top level population {p[-1]:.2e} >= {TRUNCATION_LIMIT:g}; "
                f"increase the number of levels beyond {n_levels}")
        if np.any(p < -1e-12):
            # beyond round-off: clamp, restore the norm, and flag the state
            p = np.clip(p, 0, None)
            p /= p.sum()
            clamped = True
    coherence = state.coherence_01 * coh_step**n_steps
    return replace(state, populations=p, coherence_01=coherence, clamped=clamped)


def steady_state(n_levels, gamma_plus, gamma_minus):
    """Stationary populations of :func:`rate_matrix`: a truncated geometric series."""
    if gamma_plus <= 0:
        raise ValueError("steady state needs gamma_plus > 0")
    r = gamma_minus / gamma_plus
    p = r ** np.arange(n_levels, dtype=float)
    return p / p.sum()
