"""Exception hierarchy.

Every error carries a module-qualified ``code`` used by the CLI report and an
exit status class (input error, unmet precondition, internal invariant).
"""

from __future__ import annotations


class PolyPLError(Exception):
    code = "polypl.error"
    exit_status = 1


class InputError(PolyPLError, ValueError):
    code = "io.input"
    exit_status = 1


class PreconditionUnmet(PolyPLError):
    code = "precondition.unmet"
    exit_status = 2


class InvariantViolation(PolyPLError, AssertionError):
    code = "internal.invariant"
    exit_status = 3


# exact-linalg

class DimensionMismatch(InputError):
    code = "linalg.dimension_mismatch"


class DimensionCapExceeded(PreconditionUnmet):
    code = "equilibria.dimension_cap"


# network-core

class NetworkValidationError(InputError):
    """Raised by network validation.

    ``issues`` lists every problem found, the instance itself being the first.
    """

    code = "network.invalid"

    def __init__(self, message: str, issues: list | None = None):
        super().__init__(message)
        self.issues = issues if issues is not None else [self]


class DuplicateComplex(NetworkValidationError):
    code = "network.duplicate_complex"


class SelfLoopReaction(NetworkValidationError):
    code = "network.self_loop"


class OrphanSpecies(NetworkValidationError):
    code = "network.orphan_species"


class OrphanComplex(NetworkValidationError):
    code = "network.orphan_complex"


class NonIntegerStoichiometry(NetworkValidationError):
    code = "network.non_integer_stoichiometry"


class NegativeStoichiometry(NetworkValidationError):
    code = "network.negative_stoichiometry"


# kinetics-core

class KineticsError(InputError):
    code = "kinetics.invalid"


class NonPositiveConcentration(InputError):
    code = "kinetics.non_positive_concentration"


class NonRationalKinetics(PreconditionUnmet):
    code = "kinetics.non_rational"


# kinetic-indices

class LayerNotRDK(PreconditionUnmet):
    code = "indices.layer_not_rdk"

    def __init__(self, layer: int, complex_index: int, message: str):
        super().__init__(message)
        self.layer = layer
        self.complex_index = complex_index


class NotCycleTerminal(PreconditionUnmet):
    code = "indices.not_cycle_terminal"


# decomposition

class InvalidPartition(InputError):
    code = "decomposition.invalid_partition"


# equilibria-numerics

class NotWeaklyReversible(PreconditionUnmet):
    code = "equilibria.not_weakly_reversible"


class LPInfeasible(InvariantViolation):
    code = "equilibria.lp_infeasible"


class NoConvergence(PolyPLError, RuntimeError):
    code = "equilibria.no_convergence"
    exit_status = 2


# stability

class ImageNotInS(InvariantViolation):
    code = "stability.image_not_in_s"


# cli-io

class SchemaError(InputError):
    code = "io.schema"
