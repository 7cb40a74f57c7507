"""Exception types shared across the package."""


class KgdistillError(Exception):
    """Base class for package errors."""


class GraphFormatError(KgdistillError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class SplitError(KgdistillError):
    """Invalid split specification or a split that would be degenerate."""


class SamplingError(KgdistillError):
    """Random-graph generation cannot proceed (e.g. all-zero degrees)."""


class MetricError(KgdistillError):
    """Metric preconditions violated (e.g. single-class labels)."""


class ConfigError(KgdistillError):
    """Invalid configuration values or plan files."""


class TrainingDivergenceError(KgdistillError):
    """Non-finite loss encountered during training."""

    def __init__(self, message, epoch):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch
