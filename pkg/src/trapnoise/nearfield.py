"""Near-field tensors above a flat half-space and the resulting noise spectra.

The electric tensor ``g`` and magnetic tensor ``h`` are dimensionless functions
of ``kz`` (``k = |w|/c``) that multiply the free-space spectrum.  They are
available three ways:

* exact quadrature of the plane-wave (angular spectrum) integrals,
* quasi-static interpolation formulas valid for ``kz << 1``,
* closed forms for a perfect conductor (electric tensor only).

Quadrature layout.  The integration variable ``u`` (sine of the angle of
incidence) is split at ``u = 1``.  On the propagating branch ``v = sqrt(1-u^2)``
is used as variable, which cancels the ``1/v`` endpoint singularity.  On the
evanescent branch ``w = sqrt(u^2-1)`` turns the integrand into
``exp(-2 kz w)`` times an imaginary part of Fresnel coefficients; ``[1, w_max]``
is integrated in ``log w`` so the skin-depth and ``1/kz`` scales both resolve.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C, MU0
from .physical import (
    Material,
    ThermalEnvironment,
    blackbody_electric_spectrum,
    dielectric_function,
    skin_depth,
    thermal_energy,
)
from .quadrature import QuadratureError, integrate

__all__ = [
    "EvaluationMethod", "SpectrumKind", "SurfaceGeometry", "DiagonalSpectrumTensor",
    "TensorElements", "QuadratureError",
    "v_of_u", "fresnel_rp", "fresnel_rs",
    "g_exact", "h_exact", "g_asymptotic", "h_asymptotic", "g_perfect_conductor",
    "force_gradient_tensor_exact",
    "electric_nearfield_spectrum", "magnetic_nearfield_spectrum",
    "force_gradient_spectrum_zz", "select_method",
]

DEFAULT_RTOL = 1e-8
DEFAULT_BUDGET = 10_000
ASYMPTOTIC_KZ_LIMIT = 0.1
AUTO_KZ_THRESHOLD = 1e-3
AUTO_EPS_THRESHOLD = 100.0

_S_PAR = 0.5
_S_PERP = 1.0


class EvaluationMethod(str, enum.Enum):
    EXACT = "exact_quadrature"
    ASYMPTOTIC = "asymptotic_interpolation"
    PERFECT_CONDUCTOR = "perfect_conductor"


class SpectrumKind(str, enum.Enum):
    ELECTRIC = "electric"
    MAGNETIC = "magnetic"
    FORCE_GRADIENT_ZZ = "force_gradient_zz"


@dataclass(frozen=True)
class SurfaceGeometry:
    distance: float  # m, trap centre above the surface

    def __post_init__(self):
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise ValueError(f"distance must be positive, got {self.distance!r}")


@dataclass(frozen=True)
class TensorElements:
    """Parallel (xx = yy) and perpendicular (zz) elements of a diagonal tensor.

    Unpacks as ``parallel, perp``.  ``error`` holds absolute error estimates
    for quadrature results; ``warning`` flags use outside a formula's range.
    """

    parallel: float
    perp: float
    error: tuple[float, float] = (0.0, 0.0)
    warning: str | None = None

    def __iter__(self):
        yield self.parallel
        yield self.perp

    @property
    def rel_error(self) -> float:
        return max(e / abs(v) if v else 0.0
                   for e, v in zip(self.error, (self.parallel, self.perp)))


@dataclass(frozen=True)
class DiagonalSpectrumTensor:
    """Noise spectrum tensor in the surface frame (z along the normal)."""

    parallel: float
    perpendicular: float
    frequency: float
    kind: SpectrumKind
    method: EvaluationMethod
    rel_err: float = 0.0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        # tolerate round-off-sized negatives from cancelling quadrature terms
        for name in ("parallel", "perpendicular"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"noise spectrum component {name} = {val!r} is not >= 0")

    def component(self, i: int, j: int) -> float:
        if i != j:
            return 0.0
        return self.perpendicular if i == 2 else self.parallel

    def as_matrix(self) -> np.ndarray:
        return np.diag([self.parallel, self.parallel, self.perpendicular])

    def project(self, n) -> float:
        """``sum_ij n_i n_j S_ij`` for the direction of ``n`` (normalised here)."""
        n = np.asarray(n, dtype=float)
        norm = np.linalg.norm(n)
        if n.shape != (3,) or not norm > 0:
            raise ValueError(f"direction must be a nonzero 3-vector, got {n!r}")
        n = n / norm
        return float((n[0]**2 + n[1]**2) * self.parallel + n[2]**2 * self.perpendicular)


# -- Fresnel coefficients ---------------------------------------------------

def v_of_u(u):
    """Normal wave-vector component: ``sqrt(1-u^2)`` or ``i sqrt(u^2-1)``."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("u must be >= 0")
    out = np.where(u <= 1, np.sqrt(np.clip(1 - u**2, 0, None)) + 0j,
                   1j * np.sqrt(np.clip(u**2 - 1, 0, None)))
    return out[()] if out.ndim == 0 else out


def _transmitted(eps, u2):
    """``sqrt(eps - u^2)`` on the branch with non-negative imaginary part."""
    q = np.sqrt(np.asarray(eps - u2, dtype=complex))
    return np.where(q.imag < 0, -q, q)


def fresnel_rp(u, eps):
    v = v_of_u(u)
    q = _transmitted(eps, np.asarray(u, dtype=float)**2)
    r = (eps * v - q) / (eps * v + q)
    return r[()] if np.ndim(r) == 0 else r


def fresnel_rs(u, eps):
    v = v_of_u(u)
    q = _transmitted(eps, np.asarray(u, dtype=float)**2)
    r = (v - q) / (v + q)
    return r[()] if np.ndim(r) == 0 else r


def _im_ratio(a, b):
    """``Im[(a-b)/(a+b)]`` without forming the (possibly cancelling) quotient."""
    return 2 * (a * np.conj(b)).imag / np.abs(a + b)**2


# -- exact quadrature ---------------------------------------------------------

def _check_eps(eps):
    if eps is None:
        return None
    eps = complex(eps)
    if not eps.imag > 0:
        raise ValueError("exact quadrature needs Im(eps) > 0; lossless media are not supported")
    return eps


def _propagating_integrand(kz, eps, curvature):
    """Integrand over v in [0, 1]; columns g_par, g_perp, h_par, h_perp."""

    def f(v):
        v2 = v * v
        phase = np.exp(2j * kz * v)
        if curvature:
            # d^2/d(kz)^2 of exp(2 i kz v)
            phase = phase * (-4 * v2)
        if eps is None:
            rp = np.ones_like(v, dtype=complex)
            rs = -rp
        else:
            q = _transmitted(eps - 1, -v2)
            rp = (eps * v - q) / (eps * v + q)
            rs = (v - q) / (v + q)
        return np.column_stack([
            0.75 * (phase * (rs - v2 * rp)).real,
            1.5 * (phase * (1 - v2) * rp).real,
            0.75 * (phase * (rp - v2 * rs)).real,
            1.5 * (phase * (1 - v2) * rs).real,
        ])

    return f


def _evanescent_integrand(kz, eps, curvature, log_variable):
    """Integrand over w (or t = log w); the Re(-i ...) is taken analytically."""

    def f(x):
        w = np.exp(x) if log_variable else x
        w2 = w * w
        damp = np.exp(-2 * kz * w)
        if curvature:
            damp = damp * 4 * w2
        if log_variable:
            damp = damp * w
        q = _transmitted(eps - 1, w2)
        iw = 1j * w
        im_rp = _im_ratio(eps * iw, q)
        im_rs = _im_ratio(iw, q)
        return np.column_stack([
            0.75 * damp * (im_rs + w2 * im_rp),
            1.5 * damp * (1 + w2) * im_rp,
            0.75 * damp * (im_rp + w2 * im_rs),
            1.5 * damp * (1 + w2) * im_rs,
        ])

    return f


def _tail_limit(kz):
    return max(10.0, 30.0 / (2 * kz))


def _exact_tensors(kz, eps, rtol=DEFAULT_RTOL, max_intervals=DEFAULT_BUDGET, curvature=False):
    """All four tensor elements by quadrature; returns (values[4], errors[4]).

    With ``curvature`` the second derivative with respect to ``kz`` is returned
    instead of the value.
    """
    if not (kz > 0 and math.isfinite(kz)):
        raise ValueError(f"kz must be positive, got {kz!r}")
    eps = _check_eps(eps)

    prop = integrate(_propagating_integrand(kz, eps, curvature), [0.0, 0.5, 1.0],
                     rtol=rtol, max_intervals=max_intervals)
    value, error = prop.value, prop.error
    if eps is not None:
        budget = max_intervals - prop.n_intervals
        near = integrate(_evanescent_integrand(kz, eps, curvature, False), [0.0, 0.5, 1.0],
                         rtol=rtol, max_intervals=budget)
        t_max = math.log(_tail_limit(kz))
        n_panels = max(2, int(math.ceil(t_max / 1.5)))
        far = integrate(_evanescent_integrand(kz, eps, curvature, True),
                        np.linspace(0.0, t_max, n_panels + 1),
                        rtol=rtol, max_intervals=budget - near.n_intervals)
        value = value + near.value + far.value
        error = error + near.error + far.error
    return value, error


def _wrap(values, errors, idx, rtol):
    val = (float(values[idx[0]]), float(values[idx[1]]))
    err = (float(errors[idx[0]]), float(errors[idx[1]]))
    # the components are sums of separately converged pieces
    for v, e in zip(val, err):
        if v and e > 10 * rtol * abs(v) and e > 1e-12:
            return TensorElements(*val, err, warning="sum of pieces less accurate than rtol")
    return TensorElements(*val, err)


def g_exact(kz, eps, rtol=DEFAULT_RTOL, max_intervals=DEFAULT_BUDGET) -> TensorElements:
    """Electric near-field tensor by quadrature; ``eps=None`` is a perfect conductor."""
    vals, errs = _exact_tensors(kz, eps, rtol, max_intervals)
    return _wrap(vals, errs, (0, 1), rtol)


def h_exact(kz, eps, rtol=DEFAULT_RTOL, max_intervals=DEFAULT_BUDGET) -> TensorElements:
    """Magnetic near-field tensor by quadrature (s and p roles swapped)."""
    vals, errs = _exact_tensors(kz, eps, rtol, max_intervals)
    return _wrap(vals, errs, (2, 3), rtol)


def force_gradient_tensor_exact(kz, eps, rtol=DEFAULT_RTOL,
                                max_intervals=DEFAULT_BUDGET) -> TensorElements:
    """Second derivative ``d^2 h / d(kz)^2`` of the magnetic tensor by quadrature."""
    vals, errs = _exact_tensors(kz, eps, rtol, max_intervals, curvature=True)
    return _wrap(vals, errs, (2, 3), rtol)


# -- interpolation formulas and closed forms -----------------------------------

def _range_warning(kz):
    if kz >= ASYMPTOTIC_KZ_LIMIT:
        return f"kz = {kz:.3g} outside quasi-static range (kz < {ASYMPTOTIC_KZ_LIMIT})"
    return None


def g_asymptotic(kz, z_over_delta) -> TensorElements:
    """Quasi-static interpolation ``3 (k delta)^2 / (8 (kz)^3) * (s_ij + z/delta)``.

    Exact in both limits for the perpendicular element and for ``z << delta``.
    For ``z >> delta`` it gives a perpendicular/parallel ratio of
    ``(1 + x)/(1/2 + x)`` rather than the true value 1; the bias is below 2 %
    once ``z > 30 delta``.
    """
    k_delta = kz / z_over_delta
    pref = 3 * k_delta**2 / (8 * kz**3)
    return TensorElements(pref * (_S_PAR + z_over_delta), pref * (_S_PERP + z_over_delta),
                          warning=_range_warning(kz))


def h_asymptotic(kz, z_over_delta, k_delta) -> TensorElements:
    """Quasi-static interpolation ``3 s_ij / (8 (k delta)^2 kz) / (1 + 2 (z/delta)^3 / 3)``."""
    pref = 3 / (8 * k_delta**2 * kz) / (1 + 2 * z_over_delta**3 / 3)
    return TensorElements(pref * _S_PAR, pref * _S_PERP, warning=_range_warning(kz))


def g_perfect_conductor(kz) -> TensorElements:
    """Closed forms above a perfect conductor; ``(-1, 1)`` as ``kz -> 0``."""
    if not kz > 0:
        raise ValueError("kz must be positive")
    x = 2 * kz
    if x < 1e-3:
        # series avoids the cancellation in sin x / x^3 - cos x / x^2
        a = 1 / 3 - x**2 / 30 + x**4 / 840
        b = 1 - x**2 / 6 + x**4 / 120
    else:
        a = math.sin(x) / x**3 - math.cos(x) / x**2
        b = math.sin(x) / x
    return TensorElements(1.5 * (a - b), 3 * a)


# -- physical spectra ------------------------------------------------------------

def select_method(method, kz, eps) -> EvaluationMethod:
    """Resolve ``"auto"``: interpolation for ``kz < 1e-3`` on good conductors."""
    if method in (None, "auto"):
        if kz < AUTO_KZ_THRESHOLD and abs(eps) > AUTO_EPS_THRESHOLD:
            return EvaluationMethod.ASYMPTOTIC
        return EvaluationMethod.EXACT
    if isinstance(method, EvaluationMethod):
        return method
    aliases = {"exact": EvaluationMethod.EXACT, "asymptotic": EvaluationMethod.ASYMPTOTIC,
               "pc": EvaluationMethod.PERFECT_CONDUCTOR}
    try:
        return aliases.get(method) or EvaluationMethod(method)
    except ValueError:
        raise ValueError(f"unknown method {method!r}") from None


def _geometry_terms(material, geom, omega):
    k = abs(omega) / C
    delta = skin_depth(material, omega)
    eps = dielectric_function(material, abs(omega))
    return k, delta, eps


def _clip_roundoff(x, scale):
    # quadrature results may undershoot zero by round-off when the exact value is ~0
    return 0.0 if -1e-9 * scale < x < 0 else x


def _add_free_space(par, perp, bb_par, bb_perp, include, notes, scale):
    """Add the free-space term on request, or when the surface term alone is negative.

    Far from a good conductor (and always for the perfect conductor) the
    surface contribution approaches -1 times the free-space one along the
    surface; only the sum is a spectrum then.
    """
    negative = min(par, perp) < -1e-9 * scale
    if include or negative:
        par, perp = par + bb_par, perp + bb_perp
        notes["blackbody_included"] = True
        if negative and not include:
            notes["blackbody_reason"] = "surface term negative on its own"
    return _clip_roundoff(par, scale), _clip_roundoff(perp, scale)


def electric_nearfield_spectrum(material: Material, env: ThermalEnvironment,
                                geom: SurfaceGeometry, omega_signed: float,
                                method="auto", include_blackbody=False,
                                rtol=DEFAULT_RTOL) -> DiagonalSpectrumTensor:
    """Electric field noise above the surface, (V/m)^2 s.

    The interpolation path reduces, for ``hbar|w| << kT``, to
    ``kT rho / (4 pi z^3) * (s_ij + z/delta)``.
    """
    k, delta, eps = _geometry_terms(material, geom, omega_signed)
    kz = k * geom.distance
    chosen = select_method(method, kz, eps)
    s_bb = blackbody_electric_spectrum(env, omega_signed)
    notes = {"kz": kz, "skin_depth": delta, "eps": eps}
    if chosen is EvaluationMethod.ASYMPTOTIC:
        g = g_asymptotic(kz, geom.distance / delta)
    elif chosen is EvaluationMethod.EXACT:
        g = g_exact(kz, eps, rtol=rtol)
    else:
        g = g_perfect_conductor(kz)
    if g.warning:
        notes["warning"] = g.warning
    scale = s_bb * max(abs(g.parallel), abs(g.perp), 1.0)
    include = include_blackbody or chosen is EvaluationMethod.PERFECT_CONDUCTOR
    par, perp = _add_free_space(s_bb * g.parallel, s_bb * g.perp, s_bb, s_bb, include, notes, scale)
    return DiagonalSpectrumTensor(par, perp, omega_signed, SpectrumKind.ELECTRIC, chosen,
                                  g.rel_error, notes)


def magnetic_nearfield_spectrum(material: Material, env: ThermalEnvironment,
                                geom: SurfaceGeometry, omega_signed: float,
                                method="auto", include_blackbody=False,
                                rtol=DEFAULT_RTOL) -> DiagonalSpectrumTensor:
    """Magnetic field noise above the surface, T^2 s.

    The interpolation path reduces, for ``hbar|w| << kT``, to
    ``mu0^2 kT / (16 pi rho) * s_ij / z / (1 + 2 z^3 / (3 delta^3))``.
    """
    k, delta, eps = _geometry_terms(material, geom, omega_signed)
    kz = k * geom.distance
    chosen = select_method(method, kz, eps)
    if chosen is EvaluationMethod.PERFECT_CONDUCTOR:
        raise ValueError("no perfect-conductor closed form exists for the magnetic tensor")
    s_bb = blackbody_electric_spectrum(env, omega_signed) / C**2
    notes = {"kz": kz, "skin_depth": delta, "eps": eps}
    if chosen is EvaluationMethod.ASYMPTOTIC:
        h = h_asymptotic(kz, geom.distance / delta, k * delta)
    else:
        h = h_exact(kz, eps, rtol=rtol)
    if h.warning:
        notes["warning"] = h.warning
    scale = s_bb * max(abs(h.parallel), abs(h.perp), 1.0)
    par, perp = _add_free_space(s_bb * h.parallel, s_bb * h.perp, s_bb, s_bb,
                                include_blackbody, notes, scale)
    return DiagonalSpectrumTensor(par, perp, omega_signed, SpectrumKind.MAGNETIC, chosen,
                                  h.rel_error, notes)


def blackbody_force_gradient_zz(env: ThermalEnvironment, omega_signed: float,
                                mu_sq_expect: float, mu3_sq_expect: float) -> float:
    """Free-space contribution to the vertical Zeeman-force spectrum, N^2 s.

    For isotropic transverse noise the two-point correlation at vertical
    separation ``R`` is ``delta_ij (1 - (kR)^2/5) + k^2 R_i R_j / 10 + ...``,
    so ``d/dz1 d/dz2`` at coincidence gives ``k^2 (2 delta_ij - delta_i3 delta_j3) / 5``.
    """
    k = abs(omega_signed) / C
    s_bb = blackbody_electric_spectrum(env, omega_signed) / C**2
    return s_bb * k**2 * (2 * mu_sq_expect - mu3_sq_expect) / 5


def force_gradient_spectrum_zz(material: Material, env: ThermalEnvironment,
                               geom: SurfaceGeometry, omega_signed: float,
                               mu_sq_expect: float, mu3_sq_expect: float,
                               axis=(0.0, 0.0, 1.0), method="asymptotic",
                               include_blackbody=False,
                               rtol=DEFAULT_RTOL) -> DiagonalSpectrumTensor:
    """Spectrum of the vertical Zeeman force ``d/dz (mu . B)``, N^2 s.

    Only a trap axis along the surface normal is supported.  The near-field
    magnetic correlation between heights ``z1, z2`` depends on ``(z1+z2)/2``
    only, so ``S_F = (1/4) sum_a <mu_a^2> d^2 S_B^aa / dz^2``.  The
    interpolation path is
    ``mu0^2 kT / (64 pi rho) <mu^2 + mu_3^2> / z^3 / (1 + z^3/(15 delta^3))``;
    the exact path differentiates the quadrature integrand twice.

    The returned tensor carries the zz value in ``perpendicular``;
    ``parallel`` is unused and set to 0.
    """
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or not np.allclose(n / np.linalg.norm(n), [0, 0, 1]):
        raise ValueError("force-gradient spectrum is only derived for a trap axis "
                         "perpendicular to the surface")
    k, delta, eps = _geometry_terms(material, geom, omega_signed)
    z = geom.distance
    kz = k * z
    chosen = select_method(method, kz, eps)
    notes = {"kz": kz, "skin_depth": delta, "eps": eps}
    if chosen is EvaluationMethod.ASYMPTOTIC:
        theta = thermal_energy(env, omega_signed)
        value = (MU0**2 * theta / (64 * math.pi * material.resistivity)
                 * (mu_sq_expect + mu3_sq_expect) / z**3 / (1 + z**3 / (15 * delta**3)))
        rel_err = 0.0
        if kz >= ASYMPTOTIC_KZ_LIMIT:
            notes["warning"] = _range_warning(kz)
    elif chosen is EvaluationMethod.EXACT:
        d2h = force_gradient_tensor_exact(kz, eps, rtol=rtol)
        s_bb = blackbody_electric_spectrum(env, omega_signed) / C**2
        mu_par_sq = mu_sq_expect - mu3_sq_expect  # <mu_x^2 + mu_y^2>
        value = 0.25 * s_bb * k**2 * (mu_par_sq * d2h.parallel + mu3_sq_expect * d2h.perp)
        rel_err = d2h.rel_error
    else:
        raise ValueError("no perfect-conductor form exists for the force-gradient spectrum")
    bb = blackbody_force_gradient_zz(env, omega_signed, mu_sq_expect, mu3_sq_expect)
    _, value = _add_free_space(0.0, value, 0.0, bb, include_blackbody, notes,
                               max(abs(value), bb))
    return DiagonalSpectrumTensor(0.0, value, omega_signed,
                                  SpectrumKind.FORCE_GRADIENT_ZZ, chosen, rel_err, notes)

