"""Exception types shared across the toolkit."""


class VeerkitError(Exception):
    """Base class for all structured errors raised by this package."""


# --- triangulation ---

class NonInvolutiveGluing(VeerkitError):
    pass


class UngluedFace(VeerkitError):
    pass


class InvalidPermutation(VeerkitError):
    pass


class SelfGluedFace(VeerkitError):
    pass


class WrongValence(VeerkitError):
    pass


class RepeatedTetrahedron(VeerkitError):
    pass


# --- veering / cusps ---

class NonTorusLink(VeerkitError):
    pass


class MismatchedCuspCount(VeerkitError):
    pass


# --- flat surfaces ---

class HorizontalOrVerticalSaddle(VeerkitError):
    pass


class BoundExhausted(VeerkitError):
    pass


class NotPseudoAnosov(VeerkitError):
    pass


class NonManifoldGluing(VeerkitError):
    """Internal consistency failure in the rectangle-to-triangulation assembly."""


class BadSurfaceData(VeerkitError):
    pass


# --- geometry ---

class NoConvergence(VeerkitError):
    pass


class SingularJacobian(VeerkitError):
    pass


class DegenerateDrift(VeerkitError):
    pass


class DegenerateShape(VeerkitError):
    pass


class DegenerateMove(VeerkitError):
    pass


# --- certification ---

class VerificationFailed(VeerkitError):
    pass


class NotCertified(VeerkitError):
    pass


class BudgetExhausted(VeerkitError):
    pass


class TransportDegenerate(VeerkitError):
    pass


class NotNonGeometric(VeerkitError):
    pass


# --- homology / fibers ---

class ParityViolation(VeerkitError):
    pass


class NonPositiveGenus(VeerkitError):
    pass
