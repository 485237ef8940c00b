"""Running a benchmark config from Python and reading its traces back.

The same run is ``bench run configs/quadratic.yaml --out /tmp/socgs_demo``.
"""
# %%
import json
import tempfile
from pathlib import Path

from socgs.bench import load_config, read_csv, run_experiment

root = Path(__file__).resolve().parents[1]
cfg = load_config(root / "configs" / "quadratic.yaml")
out = Path(tempfile.mkdtemp(prefix="socgs_demo_"))
manifest = run_experiment(cfg, out)

# %%
print("files:", sorted(p.name for p in out.iterdir()))
print("reference:", json.dumps({k: v for k, v in manifest["reference"].items() if k != "x_opt"}, indent=1))

# %%
for name in manifest["results"]:
    tr = read_csv(out / f"{name}.csv")
    print(f"{name:6s} rows={len(tr):4d} final gap={tr.final.fw_gap:.2e} fo={tr.final.fo_calls} "
          f"hessian={tr.final.hessian_calls}")
