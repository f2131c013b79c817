"""Pulse-timing synthesis by alternating two Hamiltonians (nonholonomic control)."""

from nonholo.linalg import (
    NumericError,
    char_poly,
    expm_hermitian,
    gate_fidelity,
    poly_purity,
    unitary_fractional_power,
)
from nonholo.controllability import (
    ControllabilityReport,
    HamiltonianPair,
    kac_check,
    lie_closure_rank,
    su_rank,
)
from nonholo.synth import (
    ControlProblem,
    PulseSequence,
    RootSeed,
    SynthesisResult,
    build_identity_vector,
    find_identity_root,
    newton_refine,
    sequence_gradient,
    sequence_unitary,
    synthesize,
)
from nonholo.verification import VerificationReport, jitter_scan, verify

__version__ = "0.1.0"

__all__ = [
    "NumericError",
    "char_poly",
    "expm_hermitian",
    "gate_fidelity",
    "poly_purity",
    "unitary_fractional_power",
    "ControllabilityReport",
    "HamiltonianPair",
    "kac_check",
    "lie_closure_rank",
    "su_rank",
    "ControlProblem",
    "PulseSequence",
    "RootSeed",
    "SynthesisResult",
    "build_identity_vector",
    "find_identity_root",
    "newton_refine",
    "sequence_gradient",
    "sequence_unitary",
    "synthesize",
    "VerificationReport",
    "jitter_scan",
    "verify",
]
