"""Exception hierarchy shared by every subpackage."""


class DoubleCheckError(Exception):
    """Base class for all package errors."""


class DimensionError(DoubleCheckError, ValueError):
    pass


class DomainError(DoubleCheckError, ValueError):
    pass


class ContractError(DoubleCheckError, ValueError):
    """A caller broke an operation precondition."""


class DegenerateInputError(ContractError):
    pass


class DivergenceError(DoubleCheckError, FloatingPointError):
    def __init__(self, batch_index, loss):
        super().__init__(f"non-finite loss {loss!r} at batch {batch_index}")
        self.batch_index = batch_index
        self.loss = loss


class VocabularyError(DoubleCheckError, LookupError):
    pass


class SchemaError(DoubleCheckError, ValueError):
    def __init__(self, missing, path=None):
        where = f" in {path}" if path else ""
        super().__init__(f"missing required field(s){where}: {', '.join(missing)}")
        self.missing = list(missing)


class IntegrityError(DoubleCheckError, ValueError):
    pass


class RecordValueError(DoubleCheckError, ValueError):
    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class FormatError(DoubleCheckError, ValueError):
    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class ConfigError(DoubleCheckError, ValueError):
    pass
