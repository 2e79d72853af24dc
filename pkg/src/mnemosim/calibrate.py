"""Grid search over (lambda, gamma) against observed similarity matrices."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import similarity_matrix
from .netcore import TemporalNetwork
from .reach import ModelParams, ReachabilityMatrix, mnemonic_reachability


def unit_grid(step: float = 0.1) -> tuple[float, ...]:
    count = int(round(1.0 / step))
    if not np.isclose(count * step, 1.0):
        raise ValueError(f"grid step {step} does not divide [0, 1]")
    return tuple(round(i * step, 10) for i in range(count + 1))


@dataclass(frozen=True)
class CalibrationGrid:
    lambda_values: tuple[float, ...] = field(default_factory=unit_grid)
    gamma_values: tuple[float, ...] = field(default_factory=unit_grid)

    def __post_init__(self):
        for name in ("lambda_values", "gamma_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} is empty")
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise ValueError(f"{name} must lie in [0, 1]")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly ascending")
            object.__setattr__(self, name, vals)

    @classmethod
    def with_step(cls, step: float) -> CalibrationGrid:
        return cls(unit_grid(step), unit_grid(step))


@dataclass(frozen=True)
class CalibrationResult:
    best: ModelParams
    correlation_surface: np.ndarray  # rows lambda, columns gamma; NaN where undefined
    grid: CalibrationGrid
    targets_used: int

    @property
    def best_correlation(self) -> float:
        i = self.grid.lambda_values.index(self.best.lam)
        j = self.grid.gamma_values.index(self.best.gamma)
        return float(self.correlation_surface[i, j])


def _offdiag(M: np.ndarray) -> np.ndarray:
    return M[~np.eye(M.shape[0], dtype=bool)]


def matrix_correlation(model: ReachabilityMatrix | np.ndarray, target, symmetrize: bool = True) -> float | None:
    """Pearson r over off-diagonal entries, or None when either side is constant."""
    M = model.C if isinstance(model, ReachabilityMatrix) else np.asarray(model, dtype=float)
    T = np.asarray(target, dtype=float)
    if M.shape != T.shape or M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"model {M.shape} and target {T.shape} must be equal square matrices")
    if symmetrize:
        M = (M + M.T) / 2.0
    x, y = _offdiag(M), _offdiag(T)
    x = x - x.mean()
    y = y - y.mean()
    sx, sy = np.sqrt(x @ x), np.sqrt(y @ y)
    scale = max(1.0, np.abs(M).max(), np.abs(T).max())
    if sx <= 1e-12 * scale * np.sqrt(x.size) or sy <= 1e-12 * scale * np.sqrt(y.size):
        return None
    return float(np.clip((x @ y) / (sx * sy), -1.0, 1.0))


def similarity_target(pre, post, mode: str = "post-minus-pre") -> np.ndarray:
    """Human-side matrix from recall data: post similarity or its change from pre."""
    if mode == "post":
        return similarity_matrix(post)
    if mode == "post-minus-pre":
        return similarity_matrix(post) - similarity_matrix(pre)
    raise ValueError(f"unknown target mode {mode!r}")


def grid_search(
    tns: Sequence[TemporalNetwork],
    targets: Sequence[np.ndarray],
    grid: CalibrationGrid | None = None,
    symmetrize: bool = True,
    literal_gamma: bool = False,
    workers: int = 1,
) -> CalibrationResult:
    """Mean correlation across (network, target) pairs at every grid point.

    The best point is the maximum of the surface; ties go to the smaller
    lambda, then the smaller gamma.
    """
    grid = grid or CalibrationGrid()
    if not tns or not targets:
        raise ValueError("need at least one network and one target")
    if len(tns) != len(targets):
        raise ValueError(f"{len(tns)} networks but {len(targets)} targets")
    targets = [np.asarray(t, dtype=float) for t in targets]

    points = [(lam, gam) for lam in grid.lambda_values for gam in grid.gamma_values]

    def score(point):
        params = ModelParams(*point)
        rs = [
            matrix_correlation(mnemonic_reachability(tn, params, literal_gamma), tgt, symmetrize)
            for tn, tgt in zip(tns, targets)
        ]
        rs = [r for r in rs if r is not None]
        return float(np.mean(rs)) if rs else np.nan

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(score, points))
    else:
        values = [score(p) for p in points]
    surface = np.array(values).reshape(len(grid.lambda_values), len(grid.gamma_values))
    if np.isnan(surface).all():
        raise ValueError("correlation undefined at every grid point")

    best_val = np.nanmax(surface)
    # scan in (lambda, gamma) order so the first hit is the tie-break winner
    hits = np.argwhere(surface >= best_val - 1e-12)
    i, j = hits[0]
    best = ModelParams(grid.lambda_values[i], grid.gamma_values[j])
    return CalibrationResult(best, surface, grid, len(targets))


def write_surface_csv(result: CalibrationResult, path: str | Path) -> None:
    lines = ["lambda\\gamma," + ",".join(repr(g) for g in result.grid.gamma_values)]
    for lam, row in zip(result.grid.lambda_values, result.correlation_surface):
        lines.append(repr(lam) + "," + ",".join("nan" if np.isnan(v) else repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
