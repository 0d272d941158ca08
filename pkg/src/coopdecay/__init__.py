"""Cooperative single-excitation decay in ordered and disordered atom arrays."""

__version__ = "0.1.0"

from .errors import (CoopDecayError, ValidationError,
                     DegenerateConfigurationError, SingularSeparationError,
                     DecompositionError, PropagationError, ConfigError)
from .geometry import (UNITS, GAMMA0, K0, EPS_MIN, Environment, LatticeSpec,
                       DisorderSpec, ArrayGeometry, build_ordered,
                       apply_positional_disorder, apply_detuning_disorder,
                       build_realization, realization_specs,
                       save_geometry, load_geometry)
from .interactions import (InteractionMatrices, EffectiveHamiltonian,
                           hwg_couplings, green_coupling, build_hamiltonian,
                           noninteracting_hamiltonian)
from .spectral import (ModeDecomposition, decompose, ipr, slowest_rate,
                       mode_profile_table)
from .dynamics import (SingleExcitationState, SpectrumResult,
                       random_phase_state, site_excitation_state, propagate,
                       population_curve, fluorescence_spectrum)
from .entanglement import (BipartiteCut, half_chain_cut, binary_entropy,
                           subsystem_entropy, mutual_information,
                           mutual_information_curve)
from .ensemble import (SweepSpec, SummaryPoint, EnsembleSummary,
                       TrajectoryEnsemble, run_realization, sweep_slowest_rate,
                       population_ensemble, mutual_information_ensemble,
                       spectrum_ensemble, size_scaling_sweep)
from .cli import RunConfig, parse_config, config_from_manifest, run
