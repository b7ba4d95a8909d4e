"""Exception hierarchy.

Everything raised on bad input derives from :class:`DataError` so callers
(the CLI in particular) can separate data problems from programming errors.
"""


class DataError(ValueError):
    """Base class for invalid-input errors."""


class MalformedEvent(DataError):
    pass


class NotNormalized(DataError):
    pass


class InsufficientData(DataError):
    pass


class DegenerateData(DataError):
    pass


class UnknownParticipant(DataError):
    pass


class TooManyParticipants(DataError):
    pass


class ParticipantMismatch(DataError):
    pass


class InvalidSchedule(DataError):
    pass


class MissingGroundTruth(DataError):
    pass


class TraceFormatError(DataError):
    pass
