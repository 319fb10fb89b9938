class EditNewsError(Exception):
    pass


class ParseError(EditNewsError):
    """Input that does not conform to an expected wire or file format."""

    def __init__(self, message, *, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class TransportError(EditNewsError):
    """A remote request failed after all retries."""

    def __init__(self, message, *, status=None, url=None):
        self.status = status
        self.url = url
        super().__init__(f"{message} (status={status}, url={url})")


class LookupFailure(EditNewsError, LookupError):
    pass


class IntegrityFailure(EditNewsError):
    pass


class StorageFailure(EditNewsError):
    pass


class ConfigError(EditNewsError, ValueError):
    pass


class ProviderError(EditNewsError):
    """A degradable external provider (page stats, remote summarizer) failed."""


class EmptyAggregateError(EditNewsError, ValueError):
    pass
