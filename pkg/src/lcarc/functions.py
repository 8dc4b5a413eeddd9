"""Memoized total functions on the naturals: LC, ULAC and moduli of continuity."""

from __future__ import annotations

from typing import Callable, Dict


class MemoFunction:
    """k ↦ value, computed on demand and remembered."""

    kind = "function"

    def __init__(self, fn: Callable[[int], int], tag: str = ""):
        self._fn = fn
        self._memo: Dict[int, int] = {}
        self.tag = tag

    def __call__(self, k: int) -> int:
        if k < 0:
            raise ValueError("defined on the naturals only")
        if k not in self._memo:
            v = self._fn(k)
            if v < 0:
                raise ValueError(f"{self.kind} value {v} at {k} is negative")
            self._memo[k] = v
        return self._memo[k]

    def values(self, n: int) -> list:
        return [self(k) for k in range(n)]

    def __repr__(self) -> str:
        known = ", ".join(f"{k}:{v}" for k, v in sorted(self._memo.items()))
        return f"{type(self).__name__}({self.tag or '?'}; {known})"


class LcFunction(MemoFunction):
    kind = "LC function"


class UlacFunction(MemoFunction):
    kind = "ULAC function"


class ModulusOfContinuity(MemoFunction):
    kind = "modulus of continuity"


def identity(kind=LcFunction):
    return kind(lambda k: k, "id")


def table(values, kind=LcFunction):
    """A finite table extended by the last step: values past the end grow by one."""
    values = list(values)
    if not values:
        raise ValueError("empty table")

    def fn(k):
        if k < len(values):
            return values[k]
        return values[-1] + (k - len(values) + 1)

    return kind(fn, "table")
