"""Typed failures raised by the engines.

Budget exhaustion (the computation could not decide within its caps) is kept
apart from genuine errors so the command layer can report "undecided".
"""


class CantorAtlasError(Exception):
    """Base class for every failure raised by cantor_atlas"""

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence


class BudgetExhausted(CantorAtlasError):
    """A cap ran out before a verdict was reached"""


# sphere-core / map-analysis
class InvalidMap(CantorAtlasError):
    pass


class NoConvergence(CantorAtlasError):
    pass


class Undecided(BudgetExhausted):
    pass


class ParabolicSuspected(CantorAtlasError):
    pass


class NoDomain(BudgetExhausted):
    pass


class PreconditionFailed(CantorAtlasError):
    pass


# path-lift
class NearCriticalPoint(CantorAtlasError):
    pass


class StepFloor(BudgetExhausted):
    pass


class AmbiguousMatch(CantorAtlasError):
    pass


class PresetOnly(CantorAtlasError):
    pass


class NotContracting(BudgetExhausted):
    pass


# curve-topology
class Crowded(CantorAtlasError):
    pass


class GrazingCut(CantorAtlasError):
    pass


class NonInteger(CantorAtlasError):
    pass


class DegreeMismatch(CantorAtlasError):
    pass


class ChainAmbiguous(CantorAtlasError):
    pass


class TopologyMismatch(CantorAtlasError):
    pass


# wreath-algebra
class AlphabetEscape(CantorAtlasError):
    pass


class NotSubgroup(CantorAtlasError):
    pass


class NotNormal(CantorAtlasError):
    pass


class InconsistentHomomorphism(CantorAtlasError):
    pass


class CaseCountMismatch(CantorAtlasError):
    pass


class NoWitness(CantorAtlasError):
    pass


class ClaimViolation(CantorAtlasError):
    pass


# certify
class ShapeMismatch(CantorAtlasError):
    pass


class ReplayMismatch(CantorAtlasError):
    pass
