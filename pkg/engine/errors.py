"""
FermiSplit - Error Types
Exception hierarchy shared by the engine, the graph-spec reader and the CLI
"""

from typing import List, Optional


class FermiSplitError(Exception):
    """Base class for every error raised by FermiSplit"""


class ValidationError(FermiSplitError, ValueError):
    """Bad input or violated precondition (CLI exit code 2)"""


class DomainError(ValidationError):
    """Argument outside the domain of an operation"""


class PreconditionError(ValidationError):
    """Operation called on inputs that do not satisfy its precondition"""


class NotSameClassError(PreconditionError):
    """Connector potentials belong to different asymmetry classes"""


class NotABranchPointError(PreconditionError):
    """Energy is not a root of a(lambda)^2 + 1"""


class RamificationError(PreconditionError):
    """Branch value too close to zero for an eigenprojection"""


class ShapeError(PreconditionError):
    """Graph does not have the shape an operation requires"""


class DimensionError(ValidationError):
    """Matrix larger than the cofactor expansion supports"""


class LaurentError(ValidationError):
    """Laurent polynomials with mismatched variable counts"""


class SchemaError(ValidationError):
    """
    Graph-spec file failed validation

    Attributes:
        messages: One human readable message per problem found
    """

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class PoleError(FermiSplitError):
    """
    Energy lies inside the Dirichlet guard of some edge (CLI exit code 3)

    Attributes:
        abs_s: |s(lambda)| of the offending edge
        edge: Label of the offending edge, if known
    """

    def __init__(self, abs_s: float, edge: Optional[str] = None):
        self.abs_s = float(abs_s)
        self.edge = edge
        where = f" on edge {edge}" if edge else ""
        super().__init__(f"lambda within Dirichlet guard{where}: |s| = {self.abs_s:.3e}")


class NumericalError(FermiSplitError, ArithmeticError):
    """Internal numerical failure (CLI exit code 4)"""


class NumericalOverflowError(NumericalError):
    """Non-finite value produced during propagation"""


class ContinuationError(NumericalError):
    """Square-root branch could not be continued unambiguously along a path"""
