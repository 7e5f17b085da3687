"""Two-ray propagation and a small coverage sweep, step by step.

Traces the classic flat-ground two-ray link, shows how the ground bounce
interferes with the direct path, then sweeps a receiver grid around a tower
and writes a coverage heatmap.

Run:  python3 demos/two_ray_coverage.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from uavrank import (
    ArrayConfig,
    Scene,
    Tower,
    compute_coverage,
    rss,
    trace_paths,
)
from uavrank.covermap import grid_to_pgm, rss_cdf
from uavrank.scene import grid_shape

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)

# --- 1. a single link over flat ground -------------------------------------
flat = Scene()
tx = (0.0, 0.0, 10.0)
rx = (100.0, 0.0, 30.0)
paths = trace_paths(flat, tx, rx)
print(f"paths from {tx} to {rx}:")
for p in paths:
    print(f"  {p.kind:9s} order={p.order} length={p.length:9.3f} m "
          f"|gain|={abs(p.gain):.3e}")

one = ArrayConfig(elements=1)
total = rss(paths, one, one, flat.tx_power_w, flat.wavelength_m)
direct = rss(paths[:1], one, one, flat.tx_power_w, flat.wavelength_m)
print(f"direct-only RSS : {direct:8.2f} dBm")
print(f"two-ray RSS     : {total:8.2f} dBm "
      f"({'constructive' if total > direct else 'destructive'} ground bounce)")

# --- 2. how the interference pattern moves with range ----------------------
print("\nRSS vs horizontal range at 30 m altitude:")
for r in (50, 100, 200, 400, 800):
    p = trace_paths(flat, tx, (float(r), 0.0, 30.0))
    v = rss(p, one, one, flat.tx_power_w, flat.wavelength_m)
    print(f"  {r:4d} m : {v:8.2f} dBm")

# --- 3. a coverage grid around one tower -----------------------------------
scene = Scene(extent_m=(600.0, 600.0), grid_spacing_m=30.0, altitudes_m=(30.0,),
              towers=(Tower(id=1, x=300.0, y=300.0),))
grid = compute_coverage(scene, scene.towers[0], 30.0)
points, blockage = rss_cdf(grid)
vals = grid.values[~np.isnan(grid.values)]
print(f"\ncoverage sweep: {len(grid.values)} cells, "
      f"median RSS {np.median(vals):.1f} dBm, blockage {blockage:.1%}")

nx, ny = grid_shape(scene)
(out / "coverage_demo.pgm").write_bytes(grid_to_pgm(grid, nx, ny))
print(f"heatmap written to {out / 'coverage_demo.pgm'}")
