"""Exception types shared across the library."""


class DimensionMismatchError(ValueError):
    """Strategy or gradient length does not match the game it is used with."""


class InfiniteDivergenceError(ValueError):
    """KL(p, q) is +infinity because q(a) = 0 somewhere p(a) > 0."""


class InteriorityError(ArithmeticError):
    """A strategy that must stay in the open simplex has a zero (or negative)
    coordinate.  For multiplicative updates this signals numeric underflow
    rather than a modelling choice, so it is raised loudly instead of being
    patched by a projection."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DivergedError(RuntimeError):
    """A learning run produced a non-finite or boundary strategy at step t."""

    def __init__(self, t, player=None):
        super().__init__(f"run diverged at t={t}" + (f" (player {player})" if player else ""))
        self.t = t
        self.player = player


class StationarySolveError(RuntimeError):
    """The stationary-point solver exhausted its iteration budget.

    Carries the best iterate found so callers can inspect how close it got.
    """

    def __init__(self, message, best_profile=None, best_residual=None):
        super().__init__(message)
        self.best_profile = best_profile
        self.best_residual = best_residual
