"""Exception hierarchy shared by every module."""


class HMDemandError(Exception):
    """Base class; ``code`` is the stable identifier the CLI reports."""

    code = "error"


class LoadError(HMDemandError):
    """A purchase or panel file could not be parsed.

    ``row`` is the 1-based data row (header excluded), ``column`` the
    offending header name. Either may be None when not applicable.
    """

    code = "load_error"

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class PanelGapError(HMDemandError):
    """Some (week, type) cells have no purchase records."""

    code = "panel_gap"

    def __init__(self, gaps):
        self.gaps = list(gaps)
        shown = ", ".join(f"(week {w}, {t})" for w, t in self.gaps[:10])
        more = "" if len(self.gaps) <= 10 else f" and {len(self.gaps) - 10} more"
        super().__init__(f"{len(self.gaps)} empty week/type cells: {shown}{more}")


class NutrientError(HMDemandError):
    code = "nutrient_error"


class RankError(HMDemandError):
    """Design matrix is rank deficient; ``names`` lists the collinear set."""

    code = "rank_deficient"

    def __init__(self, names, context="design"):
        self.names = list(names)
        super().__init__(
            f"{context} matrix is rank deficient; collinear set: {', '.join(self.names)}"
        )


class AttributeMismatchError(HMDemandError):
    code = "attribute_mismatch"


class DegenerateSpaceError(HMDemandError):
    code = "degenerate_space"


class SingularCovarianceError(HMDemandError):
    code = "singular_covariance"


class ConvergenceError(HMDemandError):
    """Iterated FGLS did not converge; ``trace`` holds the per-iteration change."""

    code = "no_convergence"

    def __init__(self, trace):
        self.trace = list(trace)
        tail = ", ".join(f"{d:.3g}" for d in self.trace[-5:])
        super().__init__(
            f"FGLS did not converge after {len(self.trace)} iterations; last changes: {tail}"
        )


class UnknownDistanceError(HMDemandError):
    code = "unknown_distance"

    def __init__(self, name, available=()):
        self.name = name
        msg = f"unknown distance {name!r}"
        if available:
            msg += f"; available: {', '.join(available)}"
        super().__init__(msg)


class DimensionError(HMDemandError):
    code = "dimension_mismatch"


class CalibrationError(HMDemandError):
    code = "calibration_error"
