"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI and the scoring service can report it on one line.
"""


class LinkTrustError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__


class MalformedRow(LinkTrustError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateLink(LinkTrustError):
    pass


class SelfLink(LinkTrustError):
    pass


class IllegalAudience(LinkTrustError):
    pass


class MixedOwners(LinkTrustError):
    pass


class AggregateMismatch(LinkTrustError):
    pass


class NoPositives(LinkTrustError):
    pass


class EmptyTrainingSet(LinkTrustError):
    pass


class ArityMismatch(LinkTrustError):
    pass


class EmptyDataset(LinkTrustError):
    pass


class SingleClass(LinkTrustError):
    pass


class LengthMismatch(LinkTrustError):
    pass


class TooFewInstances(LinkTrustError):
    pass


class KExceedsTestSize(LinkTrustError):
    pass


class TooFewOwners(LinkTrustError):
    pass


class NoEligibleUsers(LinkTrustError):
    pass


class InvalidConfig(LinkTrustError):
    pass


class EmptySnapshots(LinkTrustError):
    pass
