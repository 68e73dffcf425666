"""Exception hierarchy. The CLI maps ``DataError`` subclasses to exit code 2."""


class EpsmError(Exception):
    pass


class DataError(EpsmError):
    """Bad input data (as opposed to a bug)."""


class ParseError(DataError):
    def __init__(self, message, source=None, locus=None):
        self.source = source
        self.locus = locus
        where = ":".join(str(p) for p in (source, locus) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(DataError):
    def __init__(self, violations, source=None):
        self.violations = list(violations)
        self.source = source
        head = "; ".join(str(v) for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            head += f"; ... {more} more"
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{len(self.violations)} violation(s): {head}")


class ModelError(DataError):
    """Severity-model coefficient file missing or ill-formed."""


class OffMap(DataError):
    """Ego cannot be placed on the mapped lane."""


class SchemaMismatch(DataError):
    """Per-frame CSV files do not share the expected column schema."""


class DomainError(EpsmError, ValueError):
    pass


class GeometryError(EpsmError, ValueError):
    pass


class EmptyInput(EpsmError, ValueError):
    pass


class DegenerateInput(EpsmError, ValueError):
    pass


class EmptyDetection(EpsmError, ValueError):
    pass
