"""Exception types shared across the package."""


class KgimputeError(Exception):
    """Base class for errors raised by kgimpute."""


class ParseError(KgimputeError):
    """A text input file could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        self.message = message
        super().__init__(f"{self.path}:{line_no}: {message}")


class FormatError(KgimputeError):
    """A versioned container (graph or model file) is invalid or unreadable."""


class TrainingDiverged(KgimputeError):
    """The training loss became non-finite."""
