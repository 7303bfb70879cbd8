"""OLS with HC1 heteroskedasticity-robust covariance, plus linear-restriction tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg, stats


class RankDeficiencyError(ValueError):
    def __init__(self, column: int, name: str):
        super().__init__(f"design matrix is rank deficient: column {column} ({name!r}) "
                         "is a linear combination of the columns before it")
        self.column = column
        self.name = name


class DegenerateCovarianceError(ValueError):
    pass


class TestResult(NamedTuple):
    __test__ = False
    name: str
    statistic: float
    p_value: float


@dataclass
class EstimateReport:
    names: tuple[str, ...]
    coefficients: np.ndarray
    robust_covariance: np.ndarray
    n_obs: int
    r_squared: float
    residuals: np.ndarray
    tests: list[TestResult] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def df_resid(self) -> int:
        return self.n_obs - len(self.names)

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.robust_covariance), 0.0, None))

    @property
    def t_stats(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.standard_errors

    @property
    def p_values(self) -> np.ndarray:
        t = self.t_stats
        p = 2.0 * stats.t.sf(np.abs(t), self.df_resid)
        return np.where(np.isnan(t), np.nan, p)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no coefficient named {name!r}; have {self.names}") from None

    def __getitem__(self, name: str) -> float:
        return float(self.coefficients[self.index(name)])

    def se(self, name: str) -> float:
        return float(self.standard_errors[self.index(name)])


def _check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    for j in range(X.shape[1]):
        if np.linalg.matrix_rank(X[:, : j + 1]) <= j:
            raise RankDeficiencyError(j, names[j])


def ols(X, y, names: Sequence[str] | None = None) -> EstimateReport:
    """Least squares via QR with HC1 sandwich covariance.

    R-squared is centered when ``X`` contains a constant column and
    uncentered otherwise.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    n, k = X.shape
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    if len(names) != k:
        raise ValueError("one name per column required")
    if n <= k:
        raise ValueError(f"need more observations than regressors (n={n}, k={k})")
    _check_rank(X, names)

    q, r = np.linalg.qr(X)
    beta = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    # X (X'X)^-1 = Q R^-T, so the sandwich is G G' with G = R^-1 (Q * e)'; PSD by construction
    g = linalg.solve_triangular(r, (q * resid[:, None]).T)
    cov = (n / (n - k)) * (g @ g.T)

    has_const = bool(np.any(np.all(X == 1.0, axis=0)))
    centered = y - y.mean() if has_const else y
    tss = float(centered @ centered)
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 1.0
    return EstimateReport(names, beta, cov, n, r2, resid)


def wald_test(report: EstimateReport, weights: dict[str, float], name: str = "wald",
              atol: float = 1e-10) -> TestResult:
    """F test of the single restriction sum(w_j * beta_j) = 0.

    When the restriction has (numerically) zero variance, an exactly
    satisfied restriction gives F = 0, p = 1; anything else is an error.
    """
    idx = [report.index(k) for k in weights]
    w = np.zeros(len(report.names))
    w[idx] = list(weights.values())
    value = float(w @ report.coefficients)
    var = float(w @ report.robust_covariance @ w)
    scale = max(1.0, float(np.max(np.abs(report.coefficients[idx]))))
    if var <= (atol * scale) ** 2:
        if abs(value) <= atol * scale:
            return TestResult(name, 0.0, 1.0)
        raise DegenerateCovarianceError(
            f"restriction value {value:.3g} has zero estimated variance; F is undefined")
    f_stat = value * value / var
    return TestResult(name, f_stat, float(stats.f.sf(f_stat, 1, report.df_resid)))


def symmetry_test(report: EstimateReport) -> tuple[float, float]:
    """Test that YES and NO shocks are symmetric around control: beta_yes = 2 beta_control."""
    for needed in ("yes", "control"):
        if needed not in report.names:
            raise KeyError(f"symmetry test needs a three-arm report with a {needed!r} coefficient")
    res = wald_test(report, {"yes": 1.0, "control": -2.0}, name="symmetry")
    report.tests.append(res)
    return res.statistic, res.p_value
