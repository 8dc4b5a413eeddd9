"""Step budgets for semi-decidable searches, and the errors they raise."""

from __future__ import annotations


class LcarcError(Exception):
    pass


class BudgetExhausted(LcarcError):
    """A search ran out of steps before finding what it was looking for."""

    def __init__(self, what: str, steps: int | None = None):
        self.what = what
        self.steps = steps
        msg = f"budget exhausted while searching for {what}"
        if steps is not None:
            msg += f" after {steps} steps"
        super().__init__(msg)


class PreconditionViolation(LcarcError):
    pass


class Budget:
    """Mutable step counter shared by every search in one computation."""

    def __init__(self, max_steps: int):
        if max_steps <= 0:
            raise ValueError("budget must be positive")
        self.max_steps = max_steps
        self.steps_used = 0

    def spend(self, what: str, n: int = 1) -> None:
        if self.steps_used + n > self.max_steps:
            self.steps_used = self.max_steps
            raise BudgetExhausted(what, self.max_steps)
        self.steps_used += n

    @property
    def remaining(self) -> int:
        return self.max_steps - self.steps_used

    def __repr__(self) -> str:
        return f"Budget({self.steps_used}/{self.max_steps})"


def unlimited() -> Budget:
    return Budget(1 << 62)
