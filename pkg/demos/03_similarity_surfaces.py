# Similarity as a function of x/y translation around the true transform,
# for JSM-weighted MI and for NMI. Writes CSV + heatmaps and counts local maxima.
from pathlib import Path

import numpy as np

from jsmreg.export import export_surface
from jsmreg.registration import RegistrationConfig, count_local_maxima, similarity_surface
from jsmreg.synth import generate_case, random_suite

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

case = random_suite(10, seed=7, outliers=True, gain=1.2, noise=0.02)[1]
pair = generate_case(case)
print(case.case_id, "truth", case.truth, "outlier", case.outlier)

for measure in ("jmi", "nmi"):
    grid = similarity_surface(pair.ref, pair.flt, case.truth, RegistrationConfig(measure=measure),
                              extent=10, step=1)
    export_surface(grid, out / f"surface_{measure}")
    i, j = np.unravel_index(np.nanargmax(grid), grid.shape)
    print("%s: peak at (dx, dy) = (%d, %d), %d strict local maxima"
          % (measure, j - 10, i - 10, count_local_maxima(grid)))
