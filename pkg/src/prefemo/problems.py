"""Benchmark problems, portfolio models, data ingestion, and front sampling.

The ZDT and DTLZ families use their standard community definitions with the
usual variable counts (ZDT1-3: n=30, ZDT4/6: n=10, DTLZ1: n=m+4, DTLZ2-4:
n=m+9). The portfolio models compute scenario moments of the per-period
portfolio return over a historical window; maximized objectives (expected
return, skewness, expected turnover) are negated at evaluation so every
consumer minimizes uniformly. Reports un-negate for display via ``senses``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import BoxBounds
from .scalarize import das_dennis, lattice_size

ZDT_FAMILIES = ("ZDT1", "ZDT2", "ZDT3", "ZDT4", "ZDT6")
DTLZ_FAMILIES = ("DTLZ1", "DTLZ2", "DTLZ3", "DTLZ4")
PORTFOLIO_FAMILIES = ("PORTFOLIO_MVS", "PORTFOLIO_MVSKT")
FAMILIES = ZDT_FAMILIES + DTLZ_FAMILIES + PORTFOLIO_FAMILIES

# Smallest attainable first objective on the ZDT6 front (at the global
# maximum of exp(-4x) sin^6(6 pi x) over [0, 1]).
ZDT6_F1_MIN = 0.2807753191919934


class IngestionError(ValueError):
    """A CSV input failed validation; the message names the row/column."""


class InsufficientDataError(ValueError):
    """Too few observation periods to compute scenario moments."""


@dataclass(frozen=True)
class AssetHistory:
    """Per-period rates of return and turnover ratios for n assets."""

    asset_ids: tuple[str, ...]
    returns: np.ndarray  # (T, n)
    turnovers: np.ndarray  # (T, n)

    def __post_init__(self):
        r = np.array(self.returns, dtype=float)
        t = np.array(self.turnovers, dtype=float)
        if r.ndim != 2 or r.shape != t.shape or r.shape[1] != len(self.asset_ids):
            raise ValueError("returns/turnovers must be (T, n) matrices matching asset_ids")
        if r.shape[0] < 2:
            raise InsufficientDataError("need at least 2 observation periods")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("asset history contains non-finite values")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "turnovers", t)

    @property
    def periods(self) -> int:
        return self.returns.shape[0]

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]


@dataclass(frozen=True)
class ProblemSpec:
    """A benchmark or portfolio instance: family, sizes, bounds, data."""

    family: str
    m: int
    n: int
    bounds: BoxBounds
    history: AssetHistory | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown problem family {self.family!r}")
        if self.family in ZDT_FAMILIES and self.m != 2:
            raise ValueError("ZDT problems are bi-objective")
        if self.family in DTLZ_FAMILIES and not 3 <= self.m <= 100:
            raise ValueError("DTLZ objective count must lie in 3..100")
        if self.family == "PORTFOLIO_MVS" and self.m != 3:
            raise ValueError("the mean/variance/skewness model has 3 objectives")
        if self.family == "PORTFOLIO_MVSKT" and self.m != 5:
            raise ValueError("the five-moment portfolio model has 5 objectives")
        if self.n < self.m:
            raise ValueError("need at least as many variables as objectives")
        if self.bounds.n != self.n:
            raise ValueError("bounds dimension must equal the variable count")
        if self.family in PORTFOLIO_FAMILIES and self.history is None:
            raise ValueError("portfolio specs require an asset history")

    @property
    def senses(self) -> tuple[str, ...]:
        """Native orientation per objective ('min' or 'max')."""
        if self.family == "PORTFOLIO_MVS":
            return ("max", "min", "max")
        if self.family == "PORTFOLIO_MVSKT":
            return ("max", "min", "max", "min", "max")
        return ("min",) * self.m

    @property
    def instance_id(self) -> str:
        return f"{self.family.lower()}_m{self.m}"

    @property
    def has_analytic_front(self) -> bool:
        return self.family not in PORTFOLIO_FAMILIES


def default_variable_count(family: str, m: int) -> int:
    if family in ("ZDT1", "ZDT2", "ZDT3"):
        return 30
    if family in ("ZDT4", "ZDT6"):
        return 10
    if family == "DTLZ1":
        return m + 4
    if family in DTLZ_FAMILIES:
        return m + 9
    raise ValueError(f"no default variable count for {family!r}")


def make_spec(
    family: str,
    m: int | None = None,
    n: int | None = None,
    history: AssetHistory | None = None,
) -> ProblemSpec:
    """Build a ProblemSpec with the standard sizes and bounds for a family."""
    family = family.upper()
    if family not in FAMILIES:
        raise ValueError(f"unknown problem family {family!r}")
    if family in ZDT_FAMILIES:
        m = 2
    elif family == "PORTFOLIO_MVS":
        m = 3
    elif family == "PORTFOLIO_MVSKT":
        m = 5
    elif m is None:
        raise ValueError("DTLZ problems need an explicit objective count")
    if family in PORTFOLIO_FAMILIES:
        if history is None:
            raise ValueError("portfolio specs require an asset history")
        n = history.n_assets
        bounds = BoxBounds(np.zeros(n), np.ones(n))
        return ProblemSpec(family, m, n, bounds, history)
    if n is None:
        n = default_variable_count(family, m)
    if family == "ZDT4":
        lower = np.full(n, -5.0)
        upper = np.full(n, 5.0)
        lower[0], upper[0] = 0.0, 1.0
    else:
        lower = np.zeros(n)
        upper = np.ones(n)
    return ProblemSpec(family, m, n, BoxBounds(lower, upper))


def evaluate(spec: ProblemSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate a single decision vector (minimization orientation)."""
    return evaluate_batch(spec, np.asarray(x, dtype=float)[np.newaxis, :])[0]


def evaluate_batch(spec: ProblemSpec, X: np.ndarray) -> np.ndarray:
    """Evaluate an (N, n) matrix of decision vectors into an (N, m) matrix.

    Raises:
        ValueError: On dimension mismatch or out-of-bounds rows.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.n:
        raise ValueError(f"expected (N, {spec.n}) decision matrix, got {X.shape}")
    if np.any(X < spec.bounds.lower - 1e-12) or np.any(X > spec.bounds.upper + 1e-12):
        raise ValueError("decision vector outside the problem bounds")
    family = spec.family
    if family in ZDT_FAMILIES:
        return _zdt(family, X)
    if family in DTLZ_FAMILIES:
        return _dtlz(family, spec.m, X)
    out = np.empty((X.shape[0], spec.m))
    for i, row in enumerate(X):
        out[i] = evaluate_portfolio(
            "MVS" if family == "PORTFOLIO_MVS" else "MVSKT",
            repair_to_simplex(row),
            spec.history,
        )
    return out


def _zdt(family: str, X: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    tail = X[:, 1:]
    if family == "ZDT6":
        f1 = 1.0 - np.exp(-4.0 * X[:, 0]) * np.sin(6.0 * np.pi * X[:, 0]) ** 6
        g = 1.0 + 9.0 * (tail.sum(axis=1) / (n - 1)) ** 0.25
        f2 = g * (1.0 - (f1 / g) ** 2)
        return np.column_stack([f1, f2])
    f1 = X[:, 0]
    if family == "ZDT4":
        g = 1.0 + 10.0 * (n - 1) + (tail**2 - 10.0 * np.cos(4.0 * np.pi * tail)).sum(axis=1)
    else:
        g = 1.0 + 9.0 * tail.sum(axis=1) / (n - 1)
    ratio = f1 / g
    if family == "ZDT2":
        f2 = g * (1.0 - ratio**2)
    elif family == "ZDT3":
        f2 = g * (1.0 - np.sqrt(ratio) - ratio * np.sin(10.0 * np.pi * f1))
    else:  # ZDT1, ZDT4 share the convex shape
        f2 = g * (1.0 - np.sqrt(ratio))
    return np.column_stack([f1, f2])


def _dtlz(family: str, m: int, X: np.ndarray) -> np.ndarray:
    XM = X[:, m - 1 :]
    k = XM.shape[1]
    if family in ("DTLZ1", "DTLZ3"):
        g = 100.0 * (k + ((XM - 0.5) ** 2 - np.cos(20.0 * np.pi * (XM - 0.5))).sum(axis=1))
    else:
        g = ((XM - 0.5) ** 2).sum(axis=1)
    pos = X[:, : m - 1]
    if family == "DTLZ4":
        pos = pos**100.0
    N = X.shape[0]
    F = np.empty((N, m))
    if family == "DTLZ1":
        cp = np.hstack([np.ones((N, 1)), np.cumprod(pos, axis=1)])
        scale = 0.5 * (1.0 + g)
        F[:, 0] = scale * cp[:, m - 1]
        for i in range(1, m):
            F[:, i] = scale * cp[:, m - 1 - i] * (1.0 - pos[:, m - 1 - i])
        return F
    theta = pos * (np.pi / 2.0)
    cp = np.hstack([np.ones((N, 1)), np.cumprod(np.cos(theta), axis=1)])
    scale = 1.0 + g
    F[:, 0] = scale * cp[:, m - 1]
    for i in range(1, m):
        F[:, i] = scale * cp[:, m - 1 - i] * np.sin(theta[:, m - 1 - i])
    return F


def repair_to_simplex(x: np.ndarray) -> np.ndarray:
    """Map a raw decision vector onto the portfolio simplex.

    Negatives are clamped to zero and the vector rescaled to unit sum; an
    all-zero input falls back to the uniform allocation.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot repair a non-finite allocation")
    w = np.clip(x, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        return np.full(x.size, 1.0 / x.size)
    return w / total


def evaluate_portfolio(model: str, rho: np.ndarray, hist: AssetHistory) -> np.ndarray:
    """Scenario moments of a portfolio over the historical window.

    The per-period portfolio return is the allocation-weighted sum of asset
    returns; mean, variance, skewness (third central moment) and kurtosis
    (fourth central moment) are taken over the T periods, and the expected
    turnover is the allocation-weighted mean turnover. Maximized objectives
    come back negated: MVS yields (-mean, variance, -skewness), the
    five-objective model appends (kurtosis, -expected turnover).
    """
    rho = np.asarray(rho, dtype=float)
    if rho.size != hist.n_assets:
        raise ValueError("allocation length must match the asset count")
    if abs(rho.sum() - 1.0) > 1e-9 or np.any(rho < -1e-12):
        raise ValueError("allocation must be nonnegative and sum to 1")
    if hist.periods < 2:
        raise InsufficientDataError("need at least 2 observation periods")
    psi = hist.returns @ rho
    mean = psi.mean()
    d = psi - mean
    variance = float((d**2).mean())
    skewness = float((d**3).mean())
    if model == "MVS":
        return np.array([-mean, variance, -skewness])
    if model == "MVSKT":
        kurtosis = float((d**4).mean())
        turnover = float((hist.turnovers @ rho).mean())
        return np.array([-mean, variance, -skewness, kurtosis, -turnover])
    raise ValueError(f"unknown portfolio model {model!r}")


def _read_csv_matrix(path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise InsufficientDataError(f"{path}: file is empty")
    header = tuple(cell.strip() for cell in rows[0])
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise IngestionError(f"{path}: duplicate asset ids {dupes}")
    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise IngestionError(f"{path}: row {r} has {len(row)} cells, expected {width}")
        for c, cell in enumerate(row):
            try:
                data[r - 2, c] = float(cell)
            except ValueError:
                raise IngestionError(
                    f"{path}: non-numeric cell at row {r}, column {c + 1} ({header[c]}): {cell!r}"
                ) from None
    if data.shape[0] < 2:
        raise InsufficientDataError(f"{path}: need at least 2 data rows, found {data.shape[0]}")
    return header, data


def load_asset_history(returns_path, turnovers_path) -> AssetHistory:
    """Load the two-file CSV schema (header of asset ids, one row per period).

    Both files must share the same asset ids and shape.

    Raises:
        IngestionError: Ragged rows, non-numeric cells, duplicate or
            mismatched asset ids (the message names the offending location).
        InsufficientDataError: Fewer than two observation periods.
    """
    ids_r, returns = _read_csv_matrix(returns_path)
    ids_t, turnovers = _read_csv_matrix(turnovers_path)
    if ids_r != ids_t:
        raise IngestionError("returns and turnovers files list different asset ids")
    if returns.shape != turnovers.shape:
        raise IngestionError(
            f"shape mismatch: returns {returns.shape} vs turnovers {turnovers.shape}"
        )
    return AssetHistory(ids_r, returns, turnovers)


def write_asset_history(hist: AssetHistory, returns_path, turnovers_path) -> None:
    """Write an asset history back out in the two-file CSV schema."""
    for path, matrix in ((returns_path, hist.returns), (turnovers_path, hist.turnovers)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(hist.asset_ids)
            writer.writerows(matrix.tolist())


def synthetic_history(n_assets: int = 58, periods: int = 120, seed: int = 2024) -> AssetHistory:
    """Deterministic synthetic market data in percent units.

    Stands in for the unpublished exchange dataset: heavy-ish tailed daily
    returns around a small per-asset drift, and positive turnover ratios.
    """
    rng = np.random.default_rng(seed)
    drift = rng.normal(0.05, 0.04, size=n_assets)
    scale = rng.uniform(0.8, 2.0, size=n_assets)
    returns = rng.normal(drift, scale, size=(periods, n_assets))
    shocks = rng.random((periods, n_assets)) < 0.05
    returns = returns + shocks * rng.normal(0.0, 3.0, size=(periods, n_assets))
    turnovers = np.abs(rng.normal(3.0, 1.0, size=(periods, n_assets)))
    ids = tuple(f"A{i:03d}" for i in range(n_assets))
    return AssetHistory(ids, returns, turnovers)


def sample_true_front(spec: ProblemSpec, count: int) -> np.ndarray:
    """Deterministic sample of the analytic Pareto front, shape (count, m).

    ZDT fronts are sampled on their closed-form parameterizations (ZDT3 via a
    dense grid filtered to its non-dominated segments); DTLZ fronts project a
    simplex lattice onto the front manifold (sum 0.5 for the linear front,
    unit norm for the spherical ones).

    Raises:
        ValueError: For portfolio specs (no analytic front) or count < m.
    """
    if not spec.has_analytic_front:
        raise ValueError(f"{spec.family} has no analytic front to sample")
    if count < spec.m:
        raise ValueError("need at least m front samples")
    family = spec.family
    if family in ("ZDT1", "ZDT4"):
        t = np.linspace(0.0, 1.0, count)
        return np.column_stack([t**2, 1.0 - t])
    if family == "ZDT2":
        t = np.linspace(0.0, 1.0, count)
        return np.column_stack([t, 1.0 - t**2])
    if family == "ZDT6":
        f1 = np.linspace(ZDT6_F1_MIN, 1.0, count)
        return np.column_stack([f1, 1.0 - f1**2])
    if family == "ZDT3":
        grid = np.linspace(0.0, 1.0, 10001)
        f2 = 1.0 - np.sqrt(grid) - grid * np.sin(10.0 * np.pi * grid)
        # Grid is sorted by f1, so a point is non-dominated iff its f2 lies
        # strictly below every earlier f2.
        prev_min = np.concatenate([[np.inf], np.minimum.accumulate(f2)[:-1]])
        keep = f2 < prev_min
        pts = np.column_stack([grid[keep], f2[keep]])
        return pts[_even_indices(pts.shape[0], count)]
    lattice = _lattice_at_least(spec.m, count)
    lattice = lattice[_even_indices(lattice.shape[0], count)]
    if family == "DTLZ1":
        return 0.5 * lattice
    return lattice / np.linalg.norm(lattice, axis=1, keepdims=True)


def _lattice_at_least(m: int, count: int) -> np.ndarray:
    H = 1
    while lattice_size(m, H) < count:
        H += 1
    return das_dennis(m, H).vectors


def _even_indices(total: int, count: int) -> np.ndarray:
    return np.floor(np.linspace(0, total - 1, count)).astype(int)
