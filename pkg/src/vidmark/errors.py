"""Exception hierarchy shared by all vidmark modules."""


class VidmarkError(Exception):
    pass


class UnsupportedFormat(VidmarkError):
    pass


class CorruptHeader(VidmarkError):
    pass


class DimensionMismatch(VidmarkError, ValueError):
    pass


class IoFailure(VidmarkError, OSError):
    pass


class BadShape(VidmarkError, ValueError):
    pass


class BadBandCode(VidmarkError, KeyError):
    pass


class PayloadTooLarge(VidmarkError, ValueError):
    pass


class PayloadMismatch(VidmarkError, ValueError):
    pass


class KeyClipMismatch(VidmarkError, ValueError):
    pass


class CodecUnavailable(VidmarkError):
    pass


class CodecFailure(VidmarkError):
    pass


class EmptyPool(VidmarkError, ValueError):
    pass


class FrameTooSmall(VidmarkError, ValueError):
    pass


class LengthMismatch(VidmarkError, ValueError):
    pass


class InsufficientSamples(VidmarkError, ValueError):
    pass


class ClipTooShort(VidmarkError, ValueError):
    pass


class BadGeometry(VidmarkError, ValueError):
    pass


class ConfigInvalid(VidmarkError, ValueError):
    pass


class CorpusEmpty(VidmarkError, ValueError):
    pass
