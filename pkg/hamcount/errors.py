from __future__ import annotations


class HamcountError(Exception):
    exit_code = 2


class UsageError(HamcountError, ValueError):
    exit_code = 1


class DomainError(UsageError):
    pass


class BoundExceededError(UsageError):
    def __init__(self, what: str, size: int, bound: int):
        super().__init__(f"{what}: N={size} exceeds the configured bound {bound}")
        self.size = size
        self.bound = bound


class InconsistencyError(HamcountError):
    exit_code = 2


class BudgetExceededError(HamcountError):
    exit_code = 3
