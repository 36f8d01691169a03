"""Exception hierarchy shared by all modules."""


class SRGError(Exception):
    """Base class for every error raised by this package."""


# factor graphs
class InvalidModel(SRGError):
    pass


class InvalidSize(SRGError):
    pass


class StateSpaceTooLarge(SRGError):
    pass


class ZeroPartition(SRGError):
    pass


# region graphs
class InvalidRegionGraph(SRGError):
    pass


class CyclicGraph(InvalidRegionGraph):
    pass


# reductions
class PreconditionViolated(SRGError):
    """An operator was applied to a graph that does not satisfy its preconditions."""

    def __init__(self, operator: str, clause: str):
        super().__init__(f"{operator}: {clause}")
        self.operator = operator
        self.clause = clause


class NotOuterRegion(PreconditionViolated):
    def __init__(self, operator: str, region_id: int):
        super().__init__(operator, f"region {region_id} has parents")


class ChildCliqueOrphaned(PreconditionViolated):
    pass


class MultipleParents(PreconditionViolated):
    pass


class NoCoveringSharedChildClique(PreconditionViolated):
    pass


class NotASeparator(PreconditionViolated):
    pass


class SeparatorNotComplete(PreconditionViolated):
    pass


class ChildStraddlesSplit(PreconditionViolated):
    pass


class FactorUncovered(PreconditionViolated):
    pass


class RegionComplete(SRGError):
    pass


class NotDecomposable(SRGError):
    pass


class NonDecomposableInnerRegion(SRGError):
    pass


class NotALoopGraph(SRGError):
    pass


class NotACycle(SRGError):
    pass


# constructions
class UncoveredFactor(SRGError):
    pass


class NotPairwise(SRGError):
    pass


class WidthTooLarge(SRGError):
    pass


class InvalidDims(SRGError):
    pass


class UnassignedFactor(SRGError):
    pass


class BaseNotDecomposable(SRGError):
    pass


class OuterDoesNotSubsumeBase(SRGError):
    pass


# inference
class NonCompleteInnerRegion(SRGError):
    pass


class ShapeMismatch(SRGError):
    pass


class UncoveredVariable(SRGError):
    pass


class NotConverged(SRGError):
    pass
