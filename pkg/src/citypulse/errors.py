"""Exception hierarchy shared by every stage of the pipeline."""


class CityPulseError(Exception):
    """Base class; the CLI prints ``type(err).__name__`` as the error class."""


class ParseError(CityPulseError):
    pass


class MalformedJson(ParseError):
    pass


class MissingField(ParseError):
    pass


class BadGeometry(ParseError):
    pass


class IngestIOError(CityPulseError):
    pass


class UnknownStep(CityPulseError):
    pass


class EmptyCorpus(CityPulseError):
    pass


class EmptyVocabulary(CityPulseError):
    pass


class DegenerateVocabulary(CityPulseError):
    pass


class RowMismatch(CityPulseError):
    pass


class SingleClassTraining(CityPulseError):
    pass


class TooFewExamples(CityPulseError):
    pass


class UnknownMode(CityPulseError):
    pass


class EmptyGroup(CityPulseError):
    pass


class ConfigError(CityPulseError):
    pass


class ArtifactError(CityPulseError):
    """Bad magic, version mismatch, stale hash or a held lock."""
