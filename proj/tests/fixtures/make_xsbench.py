#!/usr/bin/env python3
"""Generate the 75-profile XSBench-style bundle used by the ranking tests.

Metric values are synthetic but deterministic; only the knob layout matters
for ranking. Run from this directory: python3 make_xsbench.py
"""
import json
import pathlib

GRIDS = ["unionized", "nuclide", "hash"]
BLOCKS = [32, 64, 128, 256, 1024]
REGS = [32, 48, 64, 96, 128]

root = pathlib.Path(__file__).resolve().parent / "xsbench-75"
(root / "profiles").mkdir(parents=True, exist_ok=True)
(root / "src").mkdir(exist_ok=True)

configs = {}
for g_index, grid in enumerate(GRIDS):
    for block in BLOCKS:
        for regs in REGS:
            pid = f"{grid}-b{block:04d}-r{regs:03d}"
            configs[pid] = {"gpu_arch": "sm_90",
                            "knobs": {"grid_type": grid, "block_size": block, "max_registers": regs}}
            occupancy = min(100.0, 65536.0 / (regs * 2048) * 100.0)
            duration = 1000.0 + 37.0 * g_index + block / 16.0 + regs / 4.0
            rows = [
                ("gpu__time_duration.sum", "us", f"{duration:.2f}"),
                ("sm__warps_active.avg.pct_of_peak_sustained_active", "%", f"{occupancy:.2f}"),
                ("dram__throughput.avg.pct_of_peak_sustained_elapsed", "%", f"{40.0 + g_index * 11.5:.2f}"),
                ("smsp__average_warp_latency_issue_stalled_long_scoreboard", "cycles", f"{12.0 + g_index:.2f}"),
                ("launch__block_size", "", str(block)),
                ("launch__registers_per_thread", "register/thread", str(regs)),
            ]
            with open(root / "profiles" / f"{pid}.metrics.csv", "w") as f:
                f.write("metric,unit,value\n")
                for name, unit, value in rows:
                    f.write(f"{name},{unit},{value}\n")

manifest = {
    "app_name": "XSBench",
    "kernel_name": "xs_lookup_kernel",
    "knobs": [
        {"name": "grid_type", "type": "categorical"},
        {"name": "block_size", "type": "numeric", "unit": "threads"},
        {"name": "max_registers", "type": "numeric", "unit": "registers"},
    ],
    "defaults": {"grid_type": "unionized", "block_size": 128, "max_registers": 64, "gpu_arch": "sm_90"},
    "configs": configs,
}
with open(root / "manifest.json", "w") as f:
    json.dump(manifest, f, indent=2)
    f.write("\n")

with open(root / "src" / "xs_lookup.cu", "w") as f:
    f.write("""__global__ void xs_lookup_kernel(const double* egrid, const double* xs, double* out, int n) {
  int i = blockIdx.x * blockDim.x + threadIdx.x;
  if (i >= n) return;
  double e = egrid[i];
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (egrid[mid] > e) hi = mid; else lo = mid;
  }
  out[i] = xs[lo];
}
""")
