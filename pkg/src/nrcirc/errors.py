"""Exception hierarchy for the whole toolchain.

Errors are grouped by pipeline stage so the CLI can map them onto its
exit-code taxonomy: parse errors (2), topology errors (3), numeric
errors (4).
"""

from __future__ import annotations


class NrcircError(Exception):
    """Base class for all library errors."""


# ---------------------------------------------------------------- parsing


class NetlistError(NrcircError):
    """Base class for netlist parsing and validation failures."""


class NetlistSyntaxError(NetlistError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class UnknownElementError(NetlistError):
    pass


class DanglingNodeError(NetlistError):
    pass


class NonPositiveValueError(NetlistError):
    pass


class MatrixShapeError(NetlistError):
    pass


class InvalidImmittanceError(NetlistError):
    """Matrix does not satisfy the declared immittance kind's invariant."""


class BadParamsError(NetlistError):
    """Invalid parameters passed to a fixture generator."""


class BadSignError(NetlistError):
    """Circulator sign entry is not +1 or -1."""


# --------------------------------------------------------------- topology


class TopologyError(NrcircError):
    """Base class for graph / tree-selection / assembly-precondition errors."""


class DisconnectedError(TopologyError):
    pass


class InfeasibleTreeError(TopologyError):
    pass


class ModeViolationError(TopologyError):
    pass


class UnknownClassError(TopologyError):
    pass


class TransformerLoopError(TopologyError):
    """Left transformer branches shunted by right ones: elimination invalid."""


class BlockPartitionError(TopologyError):
    """Device admittance cannot be split consistently into tree/chord blocks."""


class TopologyUnsupportedError(TopologyError):
    """Circuit lies outside the supported class for the requested assembly."""


class SingularKineticError(TopologyError):
    """Kinetic matrix is degenerate; carries the frozen-direction basis.

    ``null_basis`` holds unit vectors (rows) spanning the frozen flux
    combinations in the variable basis of the attempted assembly, so a
    caller can reroute the circuit through the scattering-device path.
    """

    def __init__(self, message: str, null_basis=None):
        super().__init__(message)
        self.null_basis = null_basis


# ---------------------------------------------------------------- numeric


class NumericError(NrcircError):
    """Base class for numerical failures."""


class NoAdmittanceError(NumericError):
    """Scattering matrix has a -1 eigenvalue: no admittance description."""


class NoImpedanceError(NumericError):
    """Scattering matrix has a +1 eigenvalue: no impedance description."""


class SingularMatrixError(NumericError):
    pass


class NotOrthogonalError(NumericError):
    pass


class DegeneratePairError(NumericError):
    """Real or imaginary part of a complex eigenvector vanished."""


class SingularProjectionError(NumericError):
    """Projected (1+S) block is not invertible on the reduced subspace."""


class NotPositiveDefiniteError(NumericError):
    pass


class PairingFailureError(NumericError):
    """Eigenvalues did not form conjugate pure-imaginary pairs."""


class NonConvergenceError(NumericError):
    """Implicit solver failed to converge."""


class ConstraintViolationError(NumericError):
    """Frozen-flux constraint drifted beyond tolerance during integration."""


class DimensionMismatchError(NumericError):
    pass
