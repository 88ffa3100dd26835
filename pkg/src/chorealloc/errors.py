"""Exception hierarchy shared by all modules."""


class ChoreAllocError(Exception):
    pass


class InstanceError(ChoreAllocError, ValueError):
    """Raised when an instance description is malformed."""


class DuplicateItem(InstanceError):
    pass


class NegativeCost(InstanceError):
    pass


class UnknownItem(InstanceError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidAgentCount(InstanceError):
    pass


class AllocationError(ChoreAllocError, ValueError):
    """Raised when an allocation does not match its instance."""


class BudgetExceeded(ChoreAllocError):
    """An exhaustive search would exceed its configured budget.

    Exact searches never fall back to heuristics; they raise this instead.
    """

    def __init__(self, what: str, needed: int | None, budget: int):
        self.what = what
        self.needed = needed
        self.budget = budget
        if needed is None:
            msg = f"{what}: node budget of {budget} exhausted"
        else:
            msg = f"{what}: {needed} exceeds budget {budget}"
        super().__init__(msg)
