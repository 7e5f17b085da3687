"""Evaluation: leave-one-out MAE per (altitude, threshold), measurement-trace
calibration by min-RMSE offset search, and rank histograms."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .baseline import baseline_rank
from .correlation import CorrelationModel
from .covermap import RankGrid, Z_RANK
from .kriging import KrigingConfig, krige_rank, select_neighbors

METHODS = ("kriging", "spline", "makima")


@dataclass(frozen=True)
class MAEReport:
    method: str
    # (altitude_m, K) -> (mae, evaluated cell count)
    entries: dict = field(default_factory=dict)

    def mae(self, altitude_m: float, K: float) -> float:
        return self.entries[(altitude_m, K)][0]

    def mean_mae(self) -> float:
        return float(np.mean([v[0] for v in self.entries.values()]))

    def to_csv(self) -> str:
        lines = ["method,altitude_m,K,mae,cells"]
        for (h, K), (m, n) in sorted(self.entries.items()):
            lines.append(f"{self.method},{h:g},{K:g},{m:.9f},{n}")
        return "\n".join(lines) + "\n"


def mae(true_values, est_values) -> float:
    """Mean absolute difference; NaN-paired entries are excluded."""
    t = np.asarray(true_values, dtype=float)
    e = np.asarray(est_values, dtype=float)
    if t.shape != e.shape:
        raise ValueError("true and estimated vectors must have equal length")
    keep = ~(np.isnan(t) | np.isnan(e))
    if not np.any(keep):
        raise ValueError("no comparable entries after exclusion")
    return float(np.mean(np.abs(t[keep] - e[keep])))


def loo_evaluate(rg: RankGrid, method: str, cfg: KrigingConfig,
                 model: CorrelationModel, round_estimates: bool = False,
                 altitudes_m=None, thresholds=None) -> MAEReport:
    """Leave-one-out MAE: every cell predicted from its neighbors with its own
    value withheld.  Out-of-coverage cells are excluded both as targets and as
    neighbors; cells with no eligible neighbors are skipped and not counted.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    altitudes = tuple(altitudes_m) if altitudes_m is not None else rg.altitudes_m
    ks = tuple(thresholds) if thresholds is not None else rg.thresholds
    pos = rg.positions
    entries = {}
    for h in altitudes:
        hi = rg.altitudes_m.index(h)
        for K in ks:
            ki = rg.thresholds.index(K)
            layer = rg.ranks[hi, ki].astype(float)
            stacks = rg.ranks[:, ki, :].T.astype(float)  # (N_loc, N_h)
            valid = layer >= 0
            errors = []
            for i in np.nonzero(valid)[0]:
                try:
                    est = _predict_one(i, pos, layer, stacks, method, cfg, model)
                except ValueError:
                    continue
                if round_estimates:
                    est = float(np.round(est))
                errors.append(abs(layer[i] - est))
            if errors:
                entries[(float(h), float(K))] = (float(np.mean(errors)), len(errors))
            else:
                entries[(float(h), float(K))] = (np.nan, 0)
    return MAEReport(method, entries)


def _predict_one(i, pos, layer, stacks, method, cfg, model) -> float:
    if method == "kriging":
        sol = krige_rank(pos[i], pos, layer, stacks, cfg, model, exclude=int(i))
        return sol.estimate
    neighbors = select_neighbors(pos[i], pos, cfg, exclude=int(i), valid=layer >= 0)
    if len(neighbors) < 2:
        raise ValueError("too few neighbors for a baseline interpolation")
    return baseline_rank(float(i), neighbors, layer[neighbors], method)


# ---------------------------------------------------------------------------
# Measurement traces and calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    """Timestamped flight samples of RSS (or rank) along a trajectory."""

    t_s: np.ndarray
    positions: np.ndarray  # (n, 3)
    values: np.ndarray
    kind: str = "rss_dbm"

    def __post_init__(self):
        t = np.asarray(self.t_s, dtype=float)
        if np.any(np.diff(t) < 0):
            raise ValueError("trace timestamps must be non-decreasing")
        object.__setattr__(self, "t_s", t)
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def to_csv(self) -> str:
        lines = [f"t_s,x_m,y_m,z_m,{self.kind}"]
        for t, (x, y, z), v in zip(self.t_s, self.positions, self.values):
            lines.append(f"{t:.3f},{x:.3f},{y:.3f},{z:.3f},{v:.6f}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        rows = np.genfromtxt(io.StringIO(text), delimiter=",", names=True)
        rows = np.atleast_1d(rows)
        kind = rows.dtype.names[-1]
        return cls(
            t_s=rows["t_s"],
            positions=np.column_stack([rows["x_m"], rows["y_m"], rows["z_m"]]),
            values=rows[kind],
            kind=kind,
        )


OFFSET_GRID_DB = np.round(np.arange(-500, 501) * 0.1, 1)
JOIN_WINDOW_S = 0.05


def align_traces(measured: Trace, simulated: Trace):
    """Nearest-sample time join within the 50 ms window; returns value pairs."""
    idx = np.searchsorted(simulated.t_s, measured.t_s)
    idx = np.clip(idx, 1, len(simulated.t_s) - 1) if len(simulated.t_s) > 1 else np.zeros(
        len(measured.t_s), dtype=int
    )
    left = np.maximum(idx - 1, 0)
    pick = np.where(
        np.abs(simulated.t_s[idx] - measured.t_s)
        < np.abs(simulated.t_s[left] - measured.t_s),
        idx,
        left,
    )
    dt = np.abs(simulated.t_s[pick] - measured.t_s)
    keep = dt <= JOIN_WINDOW_S
    return measured.values[keep], simulated.values[pick[keep]]


def calibrate_offset(measured: Trace, simulated: Trace) -> tuple[float, float]:
    """Min-RMSE calibration offset in dB over the 0.1 dB grid on [-50, 50].

    Returns (offset_db, post-calibration RMSE); ties favor the smaller
    absolute offset.
    """
    m, s = align_traces(measured, simulated)
    if len(m) == 0:
        raise ValueError("no overlapping samples between the traces")
    diffs = m - s
    rmse = np.sqrt(np.mean((diffs[None, :] - OFFSET_GRID_DB[:, None]) ** 2, axis=1))
    best = rmse.min()
    candidates = np.nonzero(rmse <= best + 1e-12)[0]
    pick = candidates[np.argmin(np.abs(OFFSET_GRID_DB[candidates]))]
    return float(OFFSET_GRID_DB[pick]), float(rmse[pick])


def rank_histogram(rg: RankGrid, altitude_m: float, K: float) -> dict:
    """Normalized rank histogram for one layer, including the Z fraction."""
    layer = rg.layer(altitude_m, K)
    n = len(layer)
    out = {}
    z = int(np.sum(layer == Z_RANK))
    if z:
        out["Z"] = z / n
    for r in sorted(set(layer[layer != Z_RANK].tolist())):
        out[int(r)] = int(np.sum(layer == r)) / n
    return out


def histogram_to_csv(hist: dict) -> str:
    lines = ["rank,fraction"]
    for k in sorted(hist, key=lambda x: (isinstance(x, str), x)):
        lines.append(f"{k},{hist[k]:.9f}")
    return "\n".join(lines) + "\n"
