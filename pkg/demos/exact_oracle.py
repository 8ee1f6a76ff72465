"""Brute-force enumeration of a tiny supersample.

Builds the full joint law of data, memberships and hypothesis, queries
conditional mutual informations from it, and runs the zero-one identities.
"""

import numpy as np

from cmibounds import (
    PartitionConfig,
    TinyInstance,
    enumerate_joint,
    info_query,
    theorem12_check,
)
from cmibounds.oracle import exact_cgf, expected_cv_error, loss_difference_range

cfg = PartitionConfig(n=2, m=2, k=2)
table = enumerate_joint(TinyInstance(cfg, p=0.3, algorithm="average-ERM"))
print(f"{len(table.prob)} atoms, expected cross-validation error {expected_cv_error(table):.6f}")

print("I(W; U | Z) =", f"{info_query(table, 'W', 'U', 'Z').value:.6f}")
print("I(W; U_0 | Z_0) =", f"{info_query(table, 'W', 'U0', 'Z0').value:.6f}")

lams = np.array([-2.0, -0.5, 0.5, 2.0])
delta = loss_difference_range(table)
print(f"loss range {delta:.3f}; block-0 CGF at lambda={lams.tolist()}:")
for hyp, cgf in list(exact_cgf(table, 0, lams).items())[:3]:
    print(f"  hypothesis {tuple(int(x) for x in hyp)}: {np.round(cgf, 5).tolist()}")

report = theorem12_check(TinyInstance(PartitionConfig(3, 3, 3), 0.5, "majority-vote", "zero-one"), strict=False)
print(f"\nzero-one identities: {len(report.checks)} checks, all pass: {report.passed}")
for check in report.checks[:4]:
    print(f"  {check.name}: {check.lhs:.6f} vs {check.rhs:.6f}")
