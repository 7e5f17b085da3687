"""Grid sweeps: RSS coverage maps, Voronoi joint coverage, CDFs, rank grids.

Out-of-coverage cells (no propagation path to the serving tower) are marked
with NaN in memory, the string "Z" in CSV exports, and byte 0 in PGM heatmaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import DEFAULT_THRESHOLD_RATIOS, channel_rank, rss, synthesize_channel
from .raytrace import trace_paths
from .scene import ArrayConfig, Scene, Tower, grid_positions

JOINT = "JOINT"

# Rank grids use -1 for out-of-coverage cells (integer arrays cannot hold NaN).
Z_RANK = -1


@dataclass(frozen=True)
class CoverageGrid:
    tower_id: object  # tower id or JOINT
    altitude_m: float
    mode: str  # "SISO" or "MIMO"
    positions: np.ndarray  # (N_loc, 2)
    values: np.ndarray  # RSS dBm, NaN where out of coverage

    def __post_init__(self):
        if len(self.positions) != len(self.values):
            raise ValueError("positions and values must have equal length")

    @property
    def blockage_fraction(self) -> float:
        return float(np.mean(np.isnan(self.values)))


@dataclass(frozen=True)
class RankGrid:
    positions: np.ndarray  # (N_loc, 2)
    altitudes_m: tuple  # (N_h,)
    thresholds: tuple  # (N_K,) threshold ratio constants K
    ranks: np.ndarray  # int, shape (N_h, N_K, N_loc), Z_RANK for out-of-coverage
    serving_tower: np.ndarray  # tower id per grid index

    def layer(self, altitude_m: float, K: float) -> np.ndarray:
        hi = self.altitudes_m.index(altitude_m)
        ki = self.thresholds.index(K)
        return self.ranks[hi, ki]


def _rx_array(mode: str, rx_array: ArrayConfig | None) -> ArrayConfig:
    if mode == "SISO":
        return ArrayConfig(elements=1)
    if mode == "MIMO":
        return rx_array if rx_array is not None else ArrayConfig()
    raise ValueError(f"mode must be 'SISO' or 'MIMO', got {mode!r}")


def _tx_array(mode: str, tower: Tower) -> ArrayConfig:
    return ArrayConfig(elements=1) if mode == "SISO" else tower.array


def compute_coverage(s: Scene, tower: Tower, altitude_m: float, mode: str = "SISO",
                     rx_array: ArrayConfig | None = None,
                     max_reflections: int = 2) -> CoverageGrid:
    """RSS over the scene grid for one tower at one receiver altitude."""
    if altitude_m <= 0:
        raise ValueError(f"altitude must be > 0, got {altitude_m}")
    rx_cfg = _rx_array(mode, rx_array)
    tx_cfg = _tx_array(mode, tower)
    pos = grid_positions(s)
    lam = s.wavelength_m
    values = np.full(len(pos), np.nan)
    txp = tower.position
    for i, (x, y) in enumerate(pos):
        paths = trace_paths(s, txp, (x, y, altitude_m), max_reflections)
        if paths:
            values[i] = rss(paths, tx_cfg, rx_cfg, s.tx_power_w, lam)
    return CoverageGrid(tower.id, altitude_m, mode, pos, values)


def nearest_tower_ids(s: Scene, positions: np.ndarray) -> np.ndarray:
    """Serving tower per position: horizontally nearest, ties to lowest id."""
    if not s.towers:
        raise ValueError("scene has no towers")
    towers = sorted(s.towers, key=lambda t: t.id)
    txy = np.array([[t.x, t.y] for t in towers])
    d2 = ((positions[:, None, :] - txy[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first (lowest-id) tower on exact ties
    return np.array([towers[k].id for k in np.argmin(d2, axis=1)])


def joint_coverage(grids: list[CoverageGrid], s: Scene) -> CoverageGrid:
    """Each cell takes its nearest tower's RSS (nearest-tower, not best-server)."""
    if not grids:
        raise ValueError("no coverage grids given")
    ref = grids[0]
    by_tower = {}
    for g in grids:
        if (g.altitude_m, g.mode) != (ref.altitude_m, ref.mode) or len(g.values) != len(ref.values):
            raise ValueError("coverage grids must share altitude, mode and dimensions")
        by_tower[g.tower_id] = g
    serving = nearest_tower_ids(s, ref.positions)
    values = np.full(len(ref.values), np.nan)
    for i, tid in enumerate(serving):
        if tid not in by_tower:
            raise ValueError(f"missing coverage grid for tower {tid}")
        values[i] = by_tower[tid].values[i]
    return CoverageGrid(JOINT, ref.altitude_m, ref.mode, ref.positions, values)


def rss_cdf(g: CoverageGrid):
    """Empirical CDF over covered cells plus the out-of-coverage fraction.

    Returns (points, blockage_fraction) where points is a list of
    (dBm, cumulative fraction over covered cells).
    """
    vals = g.values[~np.isnan(g.values)]
    blockage = g.blockage_fraction
    if len(vals) == 0:
        return [], blockage
    vs, counts = np.unique(np.sort(vals), return_counts=True)
    cum = np.cumsum(counts) / len(vals)
    return list(zip(vs.tolist(), cum.tolist())), blockage


def compute_rank_grid(s: Scene, thresholds=DEFAULT_THRESHOLD_RATIOS,
                      altitudes_m=None, rx_array: ArrayConfig | None = None,
                      max_reflections: int = 2) -> RankGrid:
    """Thresholded channel rank per (altitude, K, grid cell), serving the
    nearest tower at each cell."""
    pos = grid_positions(s)
    altitudes = tuple(altitudes_m if altitudes_m is not None else s.altitudes_m)
    thresholds = tuple(thresholds)
    serving = nearest_tower_ids(s, pos)
    rx_cfg = rx_array if rx_array is not None else ArrayConfig()
    lam = s.wavelength_m
    towers = {t.id: t for t in s.towers}
    ranks = np.full((len(altitudes), len(thresholds), len(pos)), Z_RANK, dtype=int)
    for hi, h in enumerate(altitudes):
        for i, (x, y) in enumerate(pos):
            tower = towers[serving[i]]
            paths = trace_paths(s, tower.position, (x, y, h), max_reflections)
            if not paths:
                continue
            hmat = synthesize_channel(paths, tower.array, rx_cfg, lam, s.frequency_hz)
            for ki, K in enumerate(thresholds):
                ranks[hi, ki, i] = channel_rank(hmat, K)
    return RankGrid(pos, altitudes, thresholds, ranks, serving)


# ---------------------------------------------------------------------------
# Artifact export
# ---------------------------------------------------------------------------


def grid_to_csv(positions: np.ndarray, values: np.ndarray) -> str:
    """Value-per-cell CSV; NaN / negative rank sentinels are written as "Z"."""
    lines = ["x_m,y_m,value"]
    for (x, y), v in zip(positions, values):
        if (isinstance(v, float) and np.isnan(v)) or v == Z_RANK:
            sval = "Z"
        elif float(v) == int(v):
            sval = str(int(v))
        else:
            sval = f"{float(v):.6f}"
        lines.append(f"{x:.3f},{y:.3f},{sval}")
    return "\n".join(lines) + "\n"


def cdf_to_csv(points, blockage_fraction: float) -> str:
    lines = [f"# blockage_fraction,{blockage_fraction:.9f}", "value_dbm,fraction"]
    for v, f in points:
        lines.append(f"{v:.6f},{f:.9f}")
    return "\n".join(lines) + "\n"


def rank_grid_to_json(rg: RankGrid) -> str:
    """Machine-readable rank grid artifact for pipeline chaining."""
    import json

    return json.dumps(
        {
            "positions": [[float(x), float(y)] for x, y in rg.positions],
            "altitudes_m": list(rg.altitudes_m),
            "thresholds": list(rg.thresholds),
            "ranks": rg.ranks.tolist(),
            "serving_tower": rg.serving_tower.tolist(),
        },
        sort_keys=True,
    )


def rank_grid_from_json(text: str) -> RankGrid:
    import json

    d = json.loads(text)
    return RankGrid(
        positions=np.array(d["positions"], dtype=float),
        altitudes_m=tuple(d["altitudes_m"]),
        thresholds=tuple(d["thresholds"]),
        ranks=np.array(d["ranks"], dtype=int),
        serving_tower=np.array(d["serving_tower"], dtype=int),
    )


def grid_to_pgm(g: CoverageGrid, nx: int, ny: int,
                vmin: float = -120.0, vmax: float = -40.0) -> bytes:
    """8-bit PGM heatmap scaled over [vmin, vmax] dBm; Z cells map to byte 0."""
    img = np.zeros((ny, nx), dtype=np.uint8)
    vals = g.values.reshape(ny, nx)
    mask = ~np.isnan(vals)
    scaled = np.clip((vals - vmin) / (vmax - vmin), 0.0, 1.0)
    img[mask] = (1 + np.round(scaled[mask] * 254)).astype(np.uint8)
    header = f"P5\n{nx} {ny}\n255\n".encode()
    # flip so the first file row is the northern edge, as in a map view
    return header + img[::-1].tobytes()
