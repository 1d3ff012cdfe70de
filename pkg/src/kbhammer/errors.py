"""Exception types raised by the identification pipeline."""


class KBHError(Exception):
    """Base class for all package errors."""


class DimensionError(KBHError, ValueError):
    """Array shapes do not agree."""


class ParameterDomainError(KBHError, ValueError):
    """A hyperparameter lies outside its admissible domain."""


class NumericalError(KBHError, ArithmeticError):
    """A factorization or solve failed.

    ``context`` carries whatever is useful to reproduce the failure
    (hyperparameters, kernel order, EM iteration, ...).
    """

    def __init__(self, message, **context):
        self.message = message
        self.context = dict(context)
        super().__init__(self._render())

    def _render(self):
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v!r}" for k, v in self.context.items())
        return f"{self.message} ({details})"

    def annotate(self, **extra):
        """Return a copy with additional context entries."""
        return NumericalError(self.message, **{**self.context, **extra})


class DatasetError(KBHError, ValueError):
    """Malformed dataset or configuration file."""
