"""Noisy quantum state transfer on perfect-transfer spin chains.

Dense desk-scale simulator comparing a single-site and a two-site
logical encoding under a catalog of Lindblad noise models, with the
Bloch-averaged transfer fidelity as the figure of merit.
"""

from .chain import (
    ChainSpec,
    DegenerateSpectrumError,
    NotEquallySpacedError,
    SpectrumReport,
    build_hamiltonian,
    one_excitation_block,
    pst_spec,
    sector_phases,
    transfer_period,
    verify_parity_matching,
)
from .encodings import (
    BlochOutOfBallError,
    EncodingId,
    EncodingScheme,
    ReadoutRule,
    decode,
    encode,
    get_scheme,
    scheme_a,
    scheme_b,
    scheme_singlet,
    singlet_states,
    vacuum_padded,
)
from .fidelity import (
    CLASSICAL_THRESHOLD,
    CSV_COLUMNS,
    FidelityRecord,
    average_fidelity,
    average_fidelity_pair,
    monte_carlo_fidelity,
    noise_in_tau_units,
    operator_fidelity,
)
from .harness import (
    ContourResult,
    CrossoverResult,
    GridSpec,
    LevelNotBracketedError,
    NoSignChangeError,
    SlopeResult,
    SweepConfig,
    default_beta_values,
    find_crossover,
    global_dephase_slope,
    read_records_csv,
    read_records_jsonl,
    singlet_decay_experiment,
    singlet_static_defect,
    sweep,
    trace_threshold_contour,
    write_records_csv,
    write_records_jsonl,
)
from .lindblad import (
    DimensionMismatchError,
    EvolutionResult,
    IntegrationMethod,
    IntegratorConfig,
    ToleranceViolatedError,
    evolve,
    evolve_operator,
    lindblad_rhs,
)
from .noise import (
    CATALOG,
    NoiseKind,
    NoiseModel,
    ThermalParamMissingError,
    make_noise,
)
from .operators import (
    commutator,
    embed,
    mirror_permutation,
    partial_trace_keep_last,
    pauli,
    total_operator,
)

__version__ = "0.1.0"
