"""Random states of the degenerate c = a subclass of g2 versus generic g2.

Writes records and histograms to demos/out/.

Run: python3 demos/subclass_scan.py
"""
from pathlib import Path

from strongmono import ClassSpec
from strongmono.harness import ScanConfig, histogram, read_residuals, run_scan

out = Path(__file__).parent / "out"
for name, spec, n in [("g2", ClassSpec("g2"), 300), ("g2_a_eq_c", ClassSpec("g2", "a_eq_c"), 5000)]:
    d = out / name
    s = run_scan(ScanConfig(source=spec, n_samples=n, master_seed=11, out_dir=str(d)))
    h = histogram(read_residuals(d / "records.jsonl"))
    h.write_csv(d / "hist.csv")
    print(f"{name}: {s.count} states, {s.violations} violations "
          f"({100 * s.violation_fraction:.2f}%), min residual {s.min_residual:.4f}")
