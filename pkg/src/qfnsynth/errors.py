"""Exception hierarchy for qfnsynth."""


class QfnError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QfnError, ValueError):
    """Matrix shapes are inconsistent with each other."""


class LabelError(QfnError, ValueError):
    """Port labels collide or are not unique."""


class UnknownPort(QfnError, KeyError):
    """A referenced port label does not exist on the model."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown port"


class MultiplicityMismatch(QfnError, ValueError):
    """An edge joins two ports of different multiplicity."""


class InconsistentAdjacency(QfnError, ValueError):
    """An adjacency matrix is not a valid channel pairing."""


class SingularConnection(QfnError, ArithmeticError):
    """The loop matrix of an interconnection is (numerically) singular."""


class DegenerateScattering(QfnError, ArithmeticError):
    """A pair of scattering phases has S_jk * S_kj == 1."""


class InvalidChoice(QfnError, ValueError):
    """A coupling choice violates its validity constraints."""


class NotPassive(QfnError, ValueError):
    """A target system is not passive."""


class PassivityBroken(QfnError, AssertionError):
    """A synthesized block failed the structural passivity scan.

    For a passive target this cannot happen; seeing it means a bug.
    """


class HashMismatch(QfnError, ValueError):
    """A netlist was checked against a target it was not built for."""


class SchemaError(QfnError, ValueError):
    """A JSON document does not conform to its schema."""


class PreconditionError(QfnError, ValueError):
    """An operation's input does not meet its stated precondition."""
