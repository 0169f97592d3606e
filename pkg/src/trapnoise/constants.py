"""SI constants used throughout the package (CODATA values via scipy)."""

from scipy import constants as _c

HBAR = _c.hbar
KB = _c.k
EPS0 = _c.epsilon_0
MU0 = _c.mu_0
C = _c.c
E_CHARGE = _c.e
MU_B = _c.physical_constants["Bohr magneton"][0]
AMU = _c.physical_constants["atomic mass constant"][0]

G_S = 2.0023
