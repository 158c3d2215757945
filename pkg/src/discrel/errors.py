"""Exception hierarchy shared by all modules.

Each class carries the exit status the command-line frontend maps it to.
"""


class DiscrelError(Exception):
    exit_code = 2


class ConfigError(DiscrelError):
    exit_code = 1


class CorpusFormatError(DiscrelError):
    """A corpus or lexicon file could not be parsed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class InstanceValidationError(DiscrelError):
    """An instance violates an invariant of the data model."""

    def __init__(self, instance_id, message):
        self.instance_id = instance_id
        super().__init__(f"instance {instance_id!r}: {message}")


class TreeParseError(DiscrelError):
    def __init__(self, message, instance_id=None):
        self.instance_id = instance_id
        if instance_id is not None:
            message = f"instance {instance_id!r}: {message}"
        super().__init__(message)


class BindingError(DiscrelError):
    """A model was applied to vectors built from a different vocabulary."""


class ModelFormatError(DiscrelError):
    pass


class SolverError(DiscrelError):
    exit_code = 3

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)


class TrainingError(DiscrelError):
    """Training of one ensemble member failed; names the member."""

    def __init__(self, relation, feature_type, cause):
        self.relation = relation
        self.feature_type = feature_type
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"training {relation}/{feature_type} failed: {cause}")


class SelectionError(DiscrelError):
    pass


class CoverageError(DiscrelError):
    exit_code = 4

    def __init__(self, missing_ids):
        self.missing_ids = list(missing_ids)
        shown = ", ".join(self.missing_ids[:20])
        more = "" if len(self.missing_ids) <= 20 else f" (+{len(self.missing_ids) - 20} more)"
        super().__init__(f"no prediction for {len(self.missing_ids)} gold instance(s): {shown}{more}")


class SynthesisError(DiscrelError):
    pass
