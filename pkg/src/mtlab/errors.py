"""Exception types shared across the package."""


class MtlabError(Exception):
    """Base class; `code` is a short machine-readable tag."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


def _make(name, code, doc):
    return type(name, (MtlabError,), {"code": code, "__doc__": doc})


SingularPointError = _make("SingularPointError", "singular-point", "Kernel evaluated on its pole.")
NoSignChangeError = _make("NoSignChangeError", "no-sign-change", "Bracket endpoints share a sign.")
InvalidOrderError = _make("InvalidOrderError", "invalid-order", "Quadrature order below 1.")
EmptyBoxError = _make("EmptyBoxError", "empty-box", "Bounding box with a nonpositive side.")
TooCloseToBoundaryError = _make("TooCloseToBoundaryError", "too-close-to-boundary",
                                "Finite-difference stencil leaves the ball.")
UnsupportedDimensionError = _make("UnsupportedDimensionError", "unsupported-dimension", "n < 3.")
DomainError = _make("DomainError", "domain-error", "Argument outside the function's domain.")
BracketFailureError = _make("BracketFailureError", "bracket-failure",
                            "Sign evaluations do not certify the expected bracket.")
InvalidExclusionError = _make("InvalidExclusionError", "invalid-exclusion",
                              "Exclusion radius outside the admissible range.")
UnsupportedDegreeError = _make("UnsupportedDegreeError", "unsupported-degree",
                               "Harmonic basis degree above the cap.")
InvalidSError = _make("InvalidSError", "invalid-s", "Level s must be positive and finite.")
InsufficientGridError = _make("InsufficientGridError", "insufficient-grid",
                              "s-grid must be geometric and span two decades.")
ClassificationMismatchError = _make("ClassificationMismatchError", "classification-mismatch",
                                    "Observed root structure contradicts the expected one.")
PipelineFailureError = _make("PipelineFailureError", "pipeline-failure", "A certification stage failed.")
ZeroNormInputError = _make("ZeroNormInputError", "zero-norm-input", "Input function has zero norm.")
