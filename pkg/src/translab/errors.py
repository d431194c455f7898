"""Exception types shared across the package.

Each carries the CLI exit code it maps to.
"""


class TranslabError(Exception):
    exit_code = 1


class BadInput(TranslabError, ValueError):
    exit_code = 2


class NotIncreasing(BadInput):
    pass


class UnsupportedRule(BadInput):
    pass


class DepthTooLarge(BadInput):
    pass


class SpacingError(BadInput):
    pass


class WindowTooLarge(TranslabError):
    exit_code = 3


class InvalidChain(TranslabError):
    exit_code = 4


class PrecisionOverflow(TranslabError):
    exit_code = 5


class NotFoundWithinBound(TranslabError):
    exit_code = 6
