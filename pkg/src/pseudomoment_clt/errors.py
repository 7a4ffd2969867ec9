"""Exception types shared across the package."""


class SpecInvalid(ValueError):
    """A distribution spec violates one or more of its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class QuadratureFailure(ArithmeticError):
    pass


class DivergentMoment(ArithmeticError):
    pass


class SignLocalizationFailure(ArithmeticError):
    pass


class NOutOfRange(ValueError):
    pass


class NuOutOfRange(ValueError):
    pass


class ConstantOverflow(OverflowError):
    pass


class RootNotBracketed(ValueError):
    pass


class AtomsPresent(ValueError):
    pass


class TruncationTooLarge(ArithmeticError):
    pass
