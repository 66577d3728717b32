"""Exception hierarchy shared across the package."""


class OODBenchError(Exception):
    """Base class for all errors raised by oodbench."""


class ShapeError(OODBenchError, ValueError):
    """Input rejected because its shape does not match what the model expects."""


class ParameterError(OODBenchError, ValueError):
    pass


class DivergenceError(OODBenchError, RuntimeError):
    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")


class FormatError(OODBenchError, ValueError):
    """Malformed binary file. ``offset`` is the byte position where parsing failed."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class IntegrityError(OODBenchError, ValueError):
    """Provenance tags are inconsistent (e.g. an ID instance tagged as novelty)."""


class ConfigError(OODBenchError, ValueError):
    pass


class MonitorStateError(OODBenchError, RuntimeError):
    """A monitor was used before being fitted (or saved while unfitted)."""


class DataError(OODBenchError):
    """A stage input (dataset file, container, checkpoint) is missing or unusable."""
