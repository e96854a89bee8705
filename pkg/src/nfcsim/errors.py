"""Exception and warning types raised across the simulator."""


class NfcSimError(Exception):
    """Base class for every error raised by nfcsim."""


# -- clock ---------------------------------------------------------------

class SchedulingInPast(NfcSimError, ValueError):
    pass


# -- link ----------------------------------------------------------------

class LinkError(NfcSimError):
    pass


class NoCardInField(LinkError):
    pass


class TagLost(LinkError):
    """The emulated card disappeared while an APDU exchange was pending."""


class Busy(LinkError):
    pass


class AlreadyLost(LinkError):
    pass


class RoleError(LinkError):
    pass


# -- protocols -----------------------------------------------------------

class UnsupportedByVariant(NfcSimError):
    pass


class FailedAtSwitch(NfcSimError):
    """A role switch did not produce a working connection."""

    def __init__(self, switch_index, at_us=None, reason=""):
        self.switch_index = switch_index
        self.at_us = at_us
        self.reason = reason
        msg = f"role switch {switch_index} failed"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


# -- chunked transfer ----------------------------------------------------

class ChunkTooLarge(NfcSimError, ValueError):
    pass


class IndexOutOfRange(NfcSimError, IndexError):
    pass


class EmptySlot(NfcSimError, LookupError):
    pass


class MessageTooLarge(NfcSimError, ValueError):
    pass


class MalformedAid(NfcSimError, ValueError):
    pass


class CorruptResponse(NfcSimError):
    pass


# -- runtime -------------------------------------------------------------

class NonPositiveSwitchTime(NfcSimError, ValueError):
    pass


class OverlappingIntervals(NfcSimError, ValueError):
    pass


# -- workloads -----------------------------------------------------------

class SizeTooLarge(NfcSimError, ValueError):
    pass


class UnsupportedKeyLength(NfcSimError, ValueError):
    pass


class PlaintextTooLong(NfcSimError, ValueError):
    pass


class KeyMismatch(NfcSimError):
    pass


class MalformedPayload(NfcSimError, ValueError):
    pass


class UnknownWorkload(NfcSimError, KeyError):
    pass


# -- configuration -------------------------------------------------------

class ConfigParse(NfcSimError):
    pass


# -- warnings ------------------------------------------------------------

class OutOfCalibrationRange(UserWarning):
    pass


class NonMonotoneInput(UserWarning):
    pass
