"""Spin matrix elements for Zeeman and hyperfine transitions.

Quantum numbers may be given as ints, floats (``0.5``) or ``Fraction``; they
are converted to doubled integers internally so half-integers are exact.
Clebsch-Gordan coefficients follow the Condon-Shortley phase convention and
are evaluated from Racah's closed formula in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .constants import G_S

AXES = ("x", "y", "z")


def _twice(j) -> int:
    """Return ``2j`` as an int, rejecting values that are not half-integers."""
    t = Fraction(j).limit_denominator(4) * 2
    if t.denominator != 1 or abs(float(t) - 2 * float(j)) > 1e-9:
        raise ValueError(f"{j!r} is not an integer or half-integer")
    return int(t)


def _check_jm(tj, tm, label):
    if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
        raise ValueError(f"invalid {label}: j={tj / 2}, m={tm / 2}")


@dataclass(frozen=True)
class SpinSystem:
    """Electronic spin ``S`` coupled to nuclear spin ``I`` (orbital L = 0)."""

    S: float
    I: float = 0.0
    g_S: float = G_S

    def __post_init__(self):
        if _twice(self.S) < 1:
            raise ValueError("electronic spin must be >= 1/2")
        if _twice(self.I) < 0:
            raise ValueError("nuclear spin must be >= 0")

    def f_values(self) -> list[Fraction]:
        """Allowed total angular momenta ``|S-I| .. S+I``."""
        ts, ti = _twice(self.S), _twice(self.I)
        return [Fraction(tf, 2) for tf in range(abs(ts - ti), ts + ti + 1, 2)]

    def levels(self):
        """All ``(F, m)`` pairs."""
        return [(f, Fraction(tm, 2)) for f in self.f_values()
                for tm in range(-int(2 * f), int(2 * f) + 1, 2)]

    def mu_sq_expect(self, m_s=None):
        """``(<mu^2>, <mu_3^2>)`` in units of ``mu_B^2`` for spin projection ``m_s``.

        ``m_s`` defaults to ``-S``.
        """
        m = -Fraction(_twice(self.S), 2) if m_s is None else Fraction(_twice(m_s), 2)
        s = Fraction(_twice(self.S), 2)
        if abs(m) > s:
            raise ValueError(f"|m_s| must be <= S, got {m}")
        g2 = self.g_S**2
        return g2 * float(s * (s + 1)), g2 * float(m * m)


@lru_cache(maxsize=4096)
def _cg_squared_signed(tj1, tj2, tj, tm1, tm2, tm) -> tuple[int, Fraction]:
    """Return ``(sign, C^2)`` with exact rational ``C^2``."""
    if tm1 + tm2 != tm:
        return 1, Fraction(0)
    if not (abs(tj1 - tj2) <= tj <= tj1 + tj2) or (tj1 + tj2 + tj) % 2:
        return 1, Fraction(0)
    f = math.factorial
    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tj2 + tj) // 2
    c = (-tj1 + tj2 + tj) // 2
    pref = Fraction((tj + 1) * f(a) * f(b) * f(c), f((tj1 + tj2 + tj) // 2 + 1))
    pref *= (f((tj + tm) // 2) * f((tj - tm) // 2) * f((tj1 - tm1) // 2)
             * f((tj1 + tm1) // 2) * f((tj2 - tm2) // 2) * f((tj2 + tm2) // 2))
    total = Fraction(0)
    for k in range(0, a + 1):
        d = [k, a - k, (tj1 - tm1) // 2 - k, (tj2 + tm2) // 2 - k,
             (tj - tj2 + tm1) // 2 + k, (tj - tj1 - tm2) // 2 + k]
        if min(d) < 0:
            continue
        denom = 1
        for x in d:
            denom *= f(x)
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 1, Fraction(0)
    return (1 if total > 0 else -1), pref * total * total


def clebsch_gordan(j1, j2, m1, m2, j, m) -> float:
    """``<j1 m1; j2 m2 | j m>`` (Condon-Shortley phase).

    Returns 0 when ``m != m1 + m2`` or the triangle rule fails; raises
    ``ValueError`` for malformed ``(j, m)`` pairs.
    """
    tj1, tj2, tj = _twice(j1), _twice(j2), _twice(j)
    tm1, tm2, tm = _twice(m1), _twice(m2), _twice(m)
    _check_jm(tj1, tm1, "j1, m1")
    _check_jm(tj2, tm2, "j2, m2")
    _check_jm(tj, tm, "j, m")
    sign, sq = _cg_squared_signed(tj1, tj2, tj, tm1, tm2, tm)
    return sign * math.sqrt(sq)


def _ladder(ts, tm_from, up):
    """``<m+-1| S_+- |m>`` for doubled quantum numbers."""
    s, m = ts / 2, tm_from / 2
    return math.sqrt(s * (s + 1) - m * (m + 1 if up else m - 1))


def spin_operator_element(S, m_f, m_i, axis) -> complex:
    """``<m_f| S_axis |m_i>`` with quantisation along z."""
    return zeeman_matrix_element(S, m_f, m_i, axis, 0.0)


def zeeman_matrix_element(S, m_f, m_i, axis, theta) -> complex:
    """``<m_f| S_axis |m_i>`` between trap-basis states.

    The trap basis is quantised along a bias field in the xz-plane at angle
    ``theta`` from the surface normal, i.e. rotated about y, so
    ``S_x = cos(theta) S'_x + sin(theta) S'_3`` and
    ``S_z = -sin(theta) S'_x + cos(theta) S'_3``.
    """
    ts, tf, ti = _twice(S), _twice(m_f), _twice(m_i)
    _check_jm(ts, tf, "S, m_f")
    _check_jm(ts, ti, "S, m_i")
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    plus = _ladder(ts, ti, True) if tf == ti + 2 else 0.0
    minus = _ladder(ts, ti, False) if tf == ti - 2 else 0.0
    three = ti / 2 if tf == ti else 0.0
    c, s = math.cos(theta), math.sin(theta)
    if axis == "x":
        return complex(0.5 * (plus + minus) * c + three * s)
    if axis == "y":
        return 0.5j * (minus - plus)
    return complex(-0.5 * (plus + minus) * s + three * c)


def hyperfine_matrix_element(S, I, F_f, m_f, F_i, m_i, axis) -> complex:
    """``<F_f m_f| S_axis |F_i m_i>``; the nuclear projection is a spectator."""
    ts, ti_ = _twice(S), _twice(I)
    for F, m, lab in ((F_f, m_f, "final"), (F_i, m_i, "initial")):
        tF = _twice(F)
        _check_jm(tF, _twice(m), f"{lab} F, m")
        if not (abs(ts - ti_) <= tF <= ts + ti_) or (tF - ts - ti_) % 2:
            raise ValueError(f"F = {F} not allowed for S = {S}, I = {I}")
    total = 0j
    tmf, tmi = _twice(m_f), _twice(m_i)
    for tmI in range(-ti_, ti_ + 1, 2):
        tms = tmi - tmI
        tms_f = tmf - tmI
        if abs(tms) > ts or abs(tms_f) > ts:
            continue
        c_i = clebsch_gordan(S, I, tms / 2, tmI / 2, F_i, m_i)
        c_f = clebsch_gordan(S, I, tms_f / 2, tmI / 2, F_f, m_f)
        if c_i and c_f:
            total += c_f * c_i * spin_operator_element(S, tms_f / 2, tms / 2, axis)
    return total


def hyperfine_matrix_element_sq(S, I, F_f, m_f, F_i, m_i, axis) -> float:
    return abs(hyperfine_matrix_element(S, I, F_f, m_f, F_i, m_i, axis)) ** 2


def hyperfine_matrix_element_sq_avg(S, I, F_f, F_i, axis) -> float:
    """Sum over final ``m_f``, average over initial ``m_i``."""
    tFf, tFi = _twice(F_f), _twice(F_i)
    total = 0.0
    for tmi in range(-tFi, tFi + 1, 2):
        for tmf in range(tmi - 2, tmi + 3, 2):
            if abs(tmf) <= tFf:
                total += hyperfine_matrix_element_sq(S, I, F_f, tmf / 2, F_i, tmi / 2, axis)
    return total / (tFi + 1)


@dataclass(frozen=True)
class AtomPreset:
    name: str
    spin: SpinSystem
    omega_hf: float  # rad/s
    F_i: float
    F_f: float


RB85 = AtomPreset("rb85", SpinSystem(0.5, 2.5), 2 * math.pi * 3.04e9, 2, 3)
CS133 = AtomPreset("cs133", SpinSystem(0.5, 3.5), 2 * math.pi * 9.193e9, 3, 4)
ATOMS = {a.name: a for a in (RB85, CS133)}
