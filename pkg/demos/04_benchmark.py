# A small benchmark: five outlier cases, both measures, results table.
# The same thing from the shell:
#   jsmreg synth ...   /   jsmreg bench suite.txt --csv out.csv --table out.txt
from pathlib import Path

from jsmreg import bench
from jsmreg.synth import random_suite

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

suite = random_suite(5, seed=7, outliers=True, gain=1.2, noise=0.02)
(out / "suite.txt").write_text(bench.format_suite(suite))

records = bench.run_benchmark(suite, ("jmi", "nmi"), workers=2)
(out / "bench.csv").write_text(bench.records_csv(records))
print(bench.summary_table(records))
