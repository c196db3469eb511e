"""Exception hierarchy.

Each error class carries the CLI exit code it maps to, so the command layer
can translate failures without a lookup table.
"""


class ComorbnetError(Exception):
    exit_code = 1


class SpecError(ComorbnetError):
    """Malformed or inconsistent network declaration."""


class CycleError(SpecError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"disease graph is not acyclic: {path}")


class DataError(ComorbnetError):
    """Invalid dataset, scenario or parameter document contents."""


class ModelError(ComorbnetError):
    """Parameters do not match the network they are used with."""


class DataIOError(ComorbnetError):
    exit_code = 2


class NumericalError(ComorbnetError):
    exit_code = 3


class ConstantResponseError(NumericalError):
    pass


class SingularHessianError(NumericalError):
    def __init__(self, message, condition=float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3g})")


class UndefinedConditionalError(NumericalError):
    pass


class FitError(NumericalError):
    """One or more equations of a network failed to fit.

    ``failures`` maps equation name to the underlying exception.
    """

    def __init__(self, failures):
        self.failures = dict(failures)
        detail = "; ".join(f"{k}: {v}" for k, v in self.failures.items())
        super().__init__(f"{len(self.failures)} equation(s) failed: {detail}")


class CapacityError(ComorbnetError):
    exit_code = 4


class ConvergenceWarning(UserWarning):
    pass


class SeparationWarning(ConvergenceWarning):
    pass
