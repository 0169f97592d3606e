"""Thermal near-field noise above flat surfaces and the heating, loss and
decoherence rates it causes for trapped ions and atoms."""

__version__ = "0.1.0"

from .physical import (  # noqa: E402
    COPPER,
    GLASS,
    Material,
    ThermalEnvironment,
    blackbody_electric_spectrum,
    dielectric_function,
    fdt_spectrum,
    skin_depth,
    thermal_occupation,
)
from .nearfield import (  # noqa: E402
    DiagonalSpectrumTensor,
    EvaluationMethod,
    SurfaceGeometry,
    electric_nearfield_spectrum,
    force_gradient_spectrum_zz,
    g_asymptotic,
    g_exact,
    g_perfect_conductor,
    h_asymptotic,
    h_exact,
    magnetic_nearfield_spectrum,
)
from .angular import SpinSystem, clebsch_gordan  # noqa: E402
from .rates import (  # noqa: E402
    LadderState,
    RateResult,
    TrapConfig,
    coherence_decay_rate,
    evolve_populations,
    hyperfine_loss_rate,
    ion_heating_rate,
    spin_heating_rate,
    zeeman_loss_rate,
)
