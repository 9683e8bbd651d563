"""Typed error hierarchy for the engine."""


class MetamorphError(Exception):
    """Base class for all engine errors."""


class DesignError(MetamorphError):
    pass


class DanglingHinge(DesignError):
    """A hinge references a cube id that does not exist."""


class NonAdjacent(DesignError):
    """Hinged cubes share no face in the reference layout."""


class OpenLoop(DesignError):
    """A declared looped motif does not close in the reference state."""


class SelfColliding(DesignError):
    """The flat reference state has overlapping cubes."""


class BadIndex(MetamorphError):
    pass


class KinematicsError(MetamorphError):
    pass


class NoConvergence(KinematicsError):
    """The closure solver stagnated above tolerance."""


class DrivenOverconstrained(KinematicsError):
    """The driven angle set has no closed solution on its slice."""


class NotOnManifold(KinematicsError):
    """State residual too large for an on-manifold operation."""


class CollisionOnPath(KinematicsError):
    """A continuation step produced interpenetrating cubes."""

    def __init__(self, step_index, pairs):
        self.step_index = step_index
        self.pairs = pairs
        super().__init__(f"collision at step {step_index}: cube pairs {pairs}")


class WrongEndpoint(KinematicsError):
    """Continuation finished away from the requested target state."""


class NotLattice(MetamorphError):
    """Operation requires a 90-degree lattice state."""


class LimitExceeded(MetamorphError):
    """Graph construction hit max_nodes/max_depth; partial result attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnknownKey(MetamorphError):
    pass


class Unreachable(MetamorphError):
    pass


class EmptyTarget(MetamorphError):
    pass


class DegenerateMesh(MetamorphError):
    pass


class EmptyDatabase(MetamorphError):
    pass


class StaleResult(MetamorphError):
    """MatchResult refers to a database generation that was rebuilt."""


class UncoverablePath(MetamorphError):
    """A path cannot be driven from the candidate actuator set."""


class ClosureDrift(MetamorphError):
    """Interpolated schedule state failed closure validation."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class UnassignedHinge(MetamorphError):
    """Schedule references a hinge outside the actuator assignment."""
