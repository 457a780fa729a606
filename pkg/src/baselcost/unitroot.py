"""Harris-Tzavalis panel unit-root test (panel-specific means case).

Fixed-T, large-N inference for the null of a unit root in every entity's
series against the alternative that all series are stationary around
entity-specific means. The test statistic is built on the least-squares
dummy-variable estimator of the AR(1) coefficient: regress y_it on
y_(i,t-1) over the usable window, demeaning regressand and regressor by
their own entity means over that window, then

    z = sqrt(N) * (rho_hat - 1 - mu) / sigma,

where the bias and scale moments are evaluated on the number of usable
transitions m (one fewer than the observed periods):

    mu      = -3 / (m + 1)
    sigma^2 = 3 * (17 m^2 - 20 m + 17) / (5 (m - 1) (m + 1)^3).

Under the null z is asymptotically standard normal; small left-tail
p-values reject the unit root in favour of stationarity. Evaluating the
moments on the transition count is what makes the statistic correctly
centred: the plim of the demeaned-window estimator under a random walk is
1 - 3/(m + 1), which is straightforward to verify by simulation.

Reference: Harris, R. D. F. and Tzavalis, E. (1999), "Inference for unit
roots in dynamic panels where the time dimension is fixed", Journal of
Econometrics 91, 201-226.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DataError, EstimationError
from .panel import PanelDataset

CASE_LABEL = "panel-specific means"


@dataclass(frozen=True)
class UnitRootResult:
    variable: str
    rho_hat: float
    z_stat: float
    p_value: float
    n_periods: int
    n_entities: int
    case: str = CASE_LABEL

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "rho": self.rho_hat,
            "z": self.z_stat,
            "p_value": self.p_value,
            "n_periods": self.n_periods,
            "n_entities": self.n_entities,
            "case": self.case,
        }


def ht_moments(n_transitions: int) -> tuple[float, float]:
    """Bias and standard deviation of (rho_hat - 1) for m usable transitions."""
    m = n_transitions
    if m < 2:
        raise DataError(f"need at least 2 usable transitions, got {m}")
    mu = -3.0 / (m + 1)
    var = 3.0 * (17.0 * m * m - 20.0 * m + 17.0) / (5.0 * (m - 1.0) * (m + 1.0) ** 3)
    return mu, float(np.sqrt(var))


def ht_statistic(levels: np.ndarray) -> tuple[float, float, float]:
    """(rho_hat, z, p) for an (N, T) array of balanced level series."""
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 2:
        raise DataError("levels must be a 2-d (entities x periods) array")
    n_ent, n_per = levels.shape
    if n_per < 3:
        raise DataError(f"need at least 3 periods, got {n_per}")
    if n_ent < 2:
        raise DataError(f"need at least 2 entities, got {n_ent}")
    if np.any(np.isnan(levels)):
        raise DataError("levels contain missing values; balance the panel first")

    dep = levels[:, 1:]
    reg = levels[:, :-1]
    dep_dm = dep - dep.mean(axis=1, keepdims=True)
    reg_dm = reg - reg.mean(axis=1, keepdims=True)
    # fsum is exactly rounded, making the statistic invariant to entity order
    denom = math.fsum((reg_dm * reg_dm).ravel().tolist())
    if denom <= 0.0:
        raise EstimationError(
            "degenerate variance: every lagged series equals its own mean"
        )
    rho = math.fsum((reg_dm * dep_dm).ravel().tolist()) / denom
    mu, sigma = ht_moments(n_per - 1)
    z = float(np.sqrt(n_ent) * (rho - 1.0 - mu) / sigma)
    return rho, z, float(norm.cdf(z))


def harris_tzavalis(ds: PanelDataset, column: str) -> UnitRootResult:
    """Run the test on one panel column.

    The column must be balanced (no missing cells) with at least 3 periods
    and 2 entities. Deterministic and invariant to entity ordering.
    """
    mat = ds.column(column)
    if np.any(np.isnan(mat)):
        raise DataError(
            f"column {column!r} is unbalanced; drop incomplete entities or periods "
            f"before testing"
        )
    rho, z, p = ht_statistic(mat)
    return UnitRootResult(
        variable=column,
        rho_hat=rho,
        z_stat=z,
        p_value=p,
        n_periods=ds.n_periods,
        n_entities=ds.n_entities,
    )
