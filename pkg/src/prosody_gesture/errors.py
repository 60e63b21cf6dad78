"""Exception hierarchy shared by every stage of the pipeline."""


class ProsodyGestureError(Exception):
    """Base class for all domain errors raised by this package."""


# MIDI parsing / conversion
class MidiError(ProsodyGestureError, ValueError):
    pass


class MalformedHeader(MidiError):
    pass


class UnsupportedFormat(MidiError):
    pass


class TruncatedTrack(MidiError):
    pass


class MalformedTrack(MidiError):
    pass


class DanglingNoteOn(MidiError):
    pass


class EmptyDocument(MidiError):
    pass


# phrases and corpora
class EmptyPhrase(ProsodyGestureError, ValueError):
    pass


class ManifestError(ProsodyGestureError, ValueError):
    pass


class MissingReference(ProsodyGestureError, KeyError):
    pass


class DegenerateReference(ProsodyGestureError, ValueError):
    pass


class EmptyCorpus(ProsodyGestureError, ValueError):
    pass


# generation
class EmptyQuadrantCorpus(ProsodyGestureError, ValueError):
    pass


class TargetOutOfBounds(ProsodyGestureError, ValueError):
    pass


class ModelFormatError(ProsodyGestureError, ValueError):
    pass


# gestures / rendering / simulation
class RobotModelError(ProsodyGestureError, ValueError):
    pass


class CyclicDependency(RobotModelError):
    pass


class EmptyBank(ProsodyGestureError, ValueError):
    pass


class SyncToleranceExceeded(ProsodyGestureError, ValueError):
    pass


# study analysis
class InsufficientPhrases(ProsodyGestureError, ValueError):
    pass


class EmptyTrials(ProsodyGestureError, ValueError):
    pass


class DegenerateSample(ProsodyGestureError, ValueError):
    pass


class InvalidSurvey(ProsodyGestureError, ValueError):
    pass
