"""Exception hierarchy shared by every dedukt module."""


class DeduktError(Exception):
    """Base class for all errors raised by dedukt."""


class ParseError(DeduktError):
    """Malformed input text. ``pos`` is a character offset into ``text``."""

    def __init__(self, message, text=None, pos=None):
        self.message = message
        self.text = text
        self.pos = pos
        if text is not None and pos is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class SignatureError(DeduktError):
    """Unknown symbol, arity mismatch, or a clash with reserved constructors."""


class TranslationError(DeduktError):
    """A term has no formula reading (or a formula has no term reading)."""


class ModelError(DeduktError):
    """Ill-formed structure, unknown state, or agent index out of range."""
