"""The group grows like a power of the norm, with exponent the Hausdorff
dimension of the gasket (about 1.3056).

Reduced words of the free generators are walked with norm pruning; the
least-squares slope of log count against log norm recovers the exponent.
"""

import numpy as np

from apollonian import orbit

ys = np.geomspace(100, 10000, 13)
table = orbit.norm_ball_count(ys)
for y, c in zip(table.ys, table.counts):
    print(f"  ||gamma|| < {y:8.1f}: {c:7d}")
print("fitted exponent:", round(orbit.fit_delta(table), 4))
