from __future__ import annotations


class TwistLabError(Exception):
    """Base error. ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InputError(TwistLabError):
    exit_code = 2


class ConvergenceError(TwistLabError):
    exit_code = 3


# Input errors

class ParseError(InputError):
    pass


class PoleAtOne(InputError):
    pass


class PoleAtNonPositiveInteger(InputError):
    pass


class CNonPositiveInteger(InputError):
    pass


class OnBranchCut(InputError):
    pass


class OutsideUnitDisk(InputError):
    pass


class NotCoprime(InputError):
    pass


class NotFundamentalDiscriminant(InputError):
    pass


class ImprimitiveEpsilon(InputError):
    pass


class ImprimitiveCharacter(InputError):
    pass


class ParityMismatch(InputError):
    pass


class ParityViolation(InputError):
    pass


class DenominatorZero(InputError):
    pass


class GammaPole(InputError):
    pass


class ZeroFactor(InputError):
    pass


class StokesRayHit(InputError):
    pass


class UnsupportedParameters(InputError):
    pass


# Convergence errors

class NonConvergent(ConvergenceError):
    pass


class QuadratureStall(ConvergenceError):
    pass


class SlowConvergence(ConvergenceError):
    pass
