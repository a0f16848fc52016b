"""Exception hierarchy shared across the package.

Everything raised on purpose derives from VoicebenchError so callers (and
the CLI) can separate data problems from genuine bugs.
"""


class VoicebenchError(Exception):
    """Base class for all errors raised by this package."""


# --- audio decoding / feature extraction ---

class MalformedWav(VoicebenchError):
    """RIFF/WAVE container is structurally broken or truncated."""


class UnsupportedEncoding(VoicebenchError):
    """WAV sample encoding outside PCM-16/PCM-24/float-32 mono or stereo."""


class ClipTooShort(VoicebenchError):
    """Clip shorter than one analysis window."""


# --- dataset loading and the split/scale/oversample pipeline ---

class EmptyDataset(VoicebenchError):
    pass


class IngestError(VoicebenchError):
    """One or more recordings failed to decode; aborts the whole load."""

    def __init__(self, failures):
        self.failures = list(failures)
        lines = ", ".join(f"{path}: {reason}" for path, reason in self.failures)
        super().__init__(f"{len(self.failures)} file(s) failed to ingest: {lines}")


class MissingColumn(VoicebenchError):
    pass


class NonNumericValue(VoicebenchError):
    pass


class InvalidLabel(VoicebenchError):
    pass


class ClassTooSmall(VoicebenchError):
    pass


class SingleClass(VoicebenchError):
    pass


class DimensionMismatch(VoicebenchError):
    pass


class DegenerateData(VoicebenchError):
    """Training input that no classifier can meaningfully fit."""


# --- metrics ---

class LengthMismatch(VoicebenchError):
    pass


class EmptyInput(VoicebenchError):
    pass


# --- statistical tests ---

class SampleTooSmall(VoicebenchError):
    pass


class SampleTooLarge(VoicebenchError):
    pass


class ZeroVariance(VoicebenchError):
    pass


class TooFewGroups(VoicebenchError):
    pass


class AllTied(VoicebenchError):
    pass


class DomainError(VoicebenchError):
    """Invalid argument to a tail-probability function."""


# --- experiment harness ---

class TooFewRuns(VoicebenchError):
    pass


class TooFewModels(VoicebenchError):
    pass


class WriteError(VoicebenchError):
    """Output file could not be written; message carries the path."""


class UsageError(VoicebenchError):
    """Bad command-line usage (exit code 1, as opposed to data errors)."""
