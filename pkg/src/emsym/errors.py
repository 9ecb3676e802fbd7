"""Exception types shared across the library."""


class EmsymError(Exception):
    """Base class for all emsym errors."""


class NotBroken(EmsymError):
    """A broken-phase quantity was requested in the symmetric phase."""


class OnBoundary(EmsymError):
    """A gapped effective description was requested exactly at a phase boundary."""


class Unstable(EmsymError):
    """The quadratic form has no normalizable ground state (at or beyond a boundary)."""


class NotStationary(EmsymError):
    """The expansion point is not a stationary point of the mean-field energy."""


class BadPartition(EmsymError):
    """Empty or improper mode partition."""


class BadDataset(EmsymError):
    """Dataset cannot be rendered or serialized in the requested way."""


class OutOfMemoryBudget(EmsymError):
    """An exact-diagonalization request exceeds the desk-scale budget."""


class ConfigError(EmsymError):
    """Invalid scan configuration; carries the offending field path."""

    def __init__(self, message, path=()):
        self.path = tuple(path)
        loc = "$" + "".join(f".{p}" if isinstance(p, str) else f"[{p}]" for p in self.path)
        super().__init__(f"{loc}: {message}")
