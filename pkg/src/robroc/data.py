"""Container for one population's test outcomes and covariates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class GroupSample:
    """Outcomes and covariate rows for a single population.

    Parameters
    ----------
    outcomes : array, shape (n,)
        Test outcome per subject.
    covariates : array, shape (n, p)
        Covariate values per subject, one column per covariate.
    label : str
        Population tag, conventionally "nondiseased" or "diseased".
    rows : array of int, optional
        Original data-file row indices, kept for diagnostics tables.
    contaminated : bool array, optional
        Marks outcomes replaced by the contamination mechanism when the
        sample came from a synthetic scenario.
    """

    outcomes: np.ndarray
    covariates: np.ndarray
    label: str = ""
    rows: np.ndarray | None = None
    contaminated: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.outcomes = np.asarray(self.outcomes, dtype=float).ravel()
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        if cov.ndim != 2:
            raise DataError("covariates must be a 2-d array")
        if cov.shape[0] != self.outcomes.size:
            raise DataError(
                f"{self.outcomes.size} outcomes but {cov.shape[0]} covariate rows"
            )
        if self.outcomes.size == 0:
            raise DataError(f"empty group {self.label!r}")
        if not np.all(np.isfinite(self.outcomes)):
            raise DataError(f"non-finite outcomes in group {self.label!r}")
        if not np.all(np.isfinite(cov)):
            raise DataError(f"non-finite covariates in group {self.label!r}")
        self.covariates = cov

    @property
    def n(self) -> int:
        return self.outcomes.size

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]
