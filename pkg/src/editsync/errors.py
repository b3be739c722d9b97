class EditsyncError(Exception):
    """Base class for all errors raised by editsync."""


class SizeError(EditsyncError):
    pass


class ScriptError(EditsyncError):
    pass


class AlignmentError(EditsyncError):
    pass


class DecodeError(EditsyncError):
    """A decoder detected that it cannot reproduce the encoded input.

    This is the "error" outcome of every protocol: the distance budget was
    exceeded, a hash collision was caught, or a randomized step was unlucky.
    """


class FormatError(EditsyncError):
    """Malformed or incompatible wire artifact."""


class StreamError(EditsyncError):
    pass
