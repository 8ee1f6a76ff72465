"""Exact bounds for the Bernoulli mean estimator with squared loss.

Shows how the leave-m-out bounds tighten as more points are held out,
and where each one settles, next to the exact generalization gap.
"""

from cmibounds import bernoulli_bound, true_gen_error

N, P = 10, 0.4

print(f"n={N}, p={P}: true gap {true_gen_error(N, P):.5f}")
for kind in ("MI", "IMI", "ICIMI", "LOO_CMI"):
    print(f"  {kind:<10} {bernoulli_bound(kind, N, p=P).value:.5f}")

print("\nheld-out size m  LMO_CMI   MN_IPCIMI")
for m in (10, 100, 1000, 10_000):
    lmo = bernoulli_bound("LMO_CMI", N, m, p=P).value
    mn = bernoulli_bound("MN_IPCIMI", N, m, p=P).value
    print(f"  {m:>14}  {lmo:.5f}   {mn:.5f}")

print("\nsingle-point bounds at p=0.25, disintegrated vs averaged information")
for m in (1, 100, 10_000):
    dis = bernoulli_bound("LMO_SCMI", N, m, p=0.25, disintegrated=True).value
    avg = bernoulli_bound("LMO_SCMI", N, m, p=0.25).value
    print(f"  m={m:<6} LMO_SCMI {avg:.5f}  disintegrated {dis:.5f}")
print(f"  SICIMI disintegrated {bernoulli_bound('SICIMI', N, p=0.25, disintegrated=True).value:.5f}")
