"""Kicked circle maps with quantized piecewise-linear kicks.

The package provides the map itself (full and reduced forms), ensemble
statistics of momentum spreading, exact integer dynamics at resonant
parameters, a transfer-operator evolution on the cylinder, and the
equivalent tight-binding lattice with deterministic on-site phases.
"""

from .dynamics import (
    EnergySeries,
    EnsembleSpec,
    MomentumHistogram,
    PhasePoint,
    ReducedState,
    growth_exponent,
    momentum_distribution,
    momentum_of,
    orbit_trace,
    record_times,
    reduced_from_momentum,
    simulate_ensemble,
    standard_map_baseline,
    step,
    step_reduced,
)
from .lattice import (
    CouplingTable,
    OnSitePhaseGen,
    OnSiteTable,
    PseudorandomnessReport,
    SliceDiagnostic,
    apply_row,
    chi_values,
    decay_profile,
    gtm_couplings,
    onsite_sequence,
    pseudorandomness_diagnostic,
    qkr_halfkick_couplings,
    qkr_tan_couplings,
)
from .pf import (
    BandLeakageError,
    HarmonicDistribution,
    PFField,
    band_distribution,
    delta_field,
    field_from_grid,
    fourier_amplitudes,
    gaussian_field,
    harmonic_distribution,
    participation_number,
    pf_evolve,
    pf_step,
    pf_step_inverse,
    uniform_field,
)
from .potential import (
    ChannelPotential,
    build_potential,
    channel_index,
    channel_intervals,
    kick_impulse,
    potential_value,
)
from .resonance import (
    BallisticPrediction,
    CycleCensus,
    ResonanceParams,
    TorusCycle,
    angle_averaged_prediction,
    ballistic_coefficient,
    cycle_census,
    find_cycle,
    integer_orbit,
    integer_step,
    inverse_integer_step,
    lattice_angle,
    resonance_params,
)

from ._version import __version__

__all__ = [
    "BallisticPrediction",
    "BandLeakageError",
    "ChannelPotential",
    "CouplingTable",
    "CycleCensus",
    "EnergySeries",
    "EnsembleSpec",
    "HarmonicDistribution",
    "MomentumHistogram",
    "OnSitePhaseGen",
    "OnSiteTable",
    "PFField",
    "PhasePoint",
    "PseudorandomnessReport",
    "ReducedState",
    "ResonanceParams",
    "SliceDiagnostic",
    "TorusCycle",
    "angle_averaged_prediction",
    "apply_row",
    "ballistic_coefficient",
    "band_distribution",
    "build_potential",
    "channel_index",
    "channel_intervals",
    "chi_values",
    "cycle_census",
    "decay_profile",
    "delta_field",
    "field_from_grid",
    "find_cycle",
    "fourier_amplitudes",
    "gaussian_field",
    "growth_exponent",
    "gtm_couplings",
    "harmonic_distribution",
    "integer_orbit",
    "integer_step",
    "inverse_integer_step",
    "kick_impulse",
    "lattice_angle",
    "momentum_distribution",
    "momentum_of",
    "onsite_sequence",
    "orbit_trace",
    "participation_number",
    "pf_evolve",
    "pf_step",
    "pf_step_inverse",
    "potential_value",
    "pseudorandomness_diagnostic",
    "qkr_halfkick_couplings",
    "qkr_tan_couplings",
    "record_times",
    "reduced_from_momentum",
    "resonance_params",
    "simulate_ensemble",
    "standard_map_baseline",
    "step",
    "step_reduced",
    "uniform_field",
    "__version__",
]
