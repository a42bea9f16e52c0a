"""Exception types raised across the simulator."""


class AmrMasError(Exception):
    """Base class for all simulator errors."""


class NotFound(AmrMasError, LookupError):
    def __init__(self, what: str, name: str):
        super().__init__(f"{what} not found: {name!r}")
        self.name = name


class UnknownAgent(AmrMasError, LookupError):
    def __init__(self, agent_id: str):
        super().__init__(f"unknown agent: {agent_id!r}")
        self.agent_id = agent_id


class UnknownStrategy(AmrMasError, ValueError):
    def __init__(self, designation: str, valid: list[str]):
        super().__init__(
            f"unknown strategy {designation!r}; valid designations: {', '.join(valid)}"
        )
        self.designation = designation
        self.valid = list(valid)


class Unreachable(AmrMasError):
    def __init__(self, cell):
        super().__init__(f"cell {tuple(cell)} is unreachable")
        self.cell = cell


class NoCapableRobot(AmrMasError):
    def __init__(self, task_id: str):
        super().__init__(f"no capable robot for task {task_id!r}")
        self.task_id = task_id


class IllegalMove(AmrMasError):
    """A robot asked to jump to a non-adjacent cell. Always a programming bug."""


class ValidationFailed(AmrMasError):
    def __init__(self, violations: list[str]):
        super().__init__("scenario invalid: " + "; ".join(violations))
        self.violations = list(violations)


class ScenarioParseError(AmrMasError):
    """Scenario file could not be decoded into a Scenario."""


class TimedOut(AmrMasError):
    def __init__(self, tick_limit: int):
        super().__init__(f"simulation did not finish within {tick_limit} ticks")
        self.tick_limit = tick_limit


class ReportError(AmrMasError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"trace record {index}: {reason}")
        self.index = index
