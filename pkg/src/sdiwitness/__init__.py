"""Semi-device-independent witness from interferometric visibility and distinguishability."""

__version__ = "0.1.0"

from .bounds import (
    classical_maximum,
    eve_success,
    hyperbit_check,
    improved_eve_cap,
    quantum_maximum,
    security_verdict,
)
from .dataio import estimate_duality, parse_scan, synthesize_counts, write_scan
from .interferometer import Block, InterferometerConfig, distinguishability, propagate, visibility
from .qcore import BinaryObservable, QubitState, expectation, helstrom, outcome_prob, state_from_bloch
from .witness import (
    bb84_preparations,
    bob_success,
    correlator_table,
    duality_witness_max,
    per_config_duality,
    symmetric_witness,
    tunable_measurements,
    witness_value,
)
