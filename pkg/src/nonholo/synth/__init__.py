"""Pulse-timing synthesis: identity roots, Newton refinement, subdivision."""

from nonholo.synth.newton import NegativeTimingTrap, NewtonOptions, NonConvergence, newton_refine
from nonholo.synth.pipeline import ControlProblem, SynthesisError, SynthesisResult, synthesize
from nonholo.synth.roots import RootNotFound, RootOptions, RootSeed, build_identity_vector, find_identity_root
from nonholo.synth.sequence import PulseSequence, sequence_gradient, sequence_unitary

__all__ = [
    "NegativeTimingTrap",
    "NewtonOptions",
    "NonConvergence",
    "newton_refine",
    "ControlProblem",
    "SynthesisError",
    "SynthesisResult",
    "synthesize",
    "RootNotFound",
    "RootOptions",
    "RootSeed",
    "build_identity_vector",
    "find_identity_root",
    "PulseSequence",
    "sequence_gradient",
    "sequence_unitary",
]
