"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Argument outside the region where a routine is certified."""


class NonConvergence(RuntimeError):
    """An iterative routine exhausted its budget without converging."""


class SingularityWarning(RuntimeWarning):
    """Result sits next to an integrable singularity and is unreliable."""
