"""Bounds for a two-valued sign decision under a truncated quadratic loss.

The hypothesis takes only two values, so the information terms are small
and are estimated with importance sampling around the rare error event.
"""

from cmibounds import GaussianInstance, McConfig, finite_w_bound

mc = McConfig(outer_samples=2000, seed=5)
for n in (10, 20, 40):
    inst = GaussianInstance(n, 2, mu=1.0, sigma=0.5, loss="truncated-quadratic")
    row = [finite_w_bound(kind, inst, mc) for kind in ("IMI", "ICIMI", "LOO_CMI", "LOFO_CMI")]
    print(f"n={n:>2}  " + "  ".join(f"{b.name} {b.value:.3e}±{b.stderr:.1e}" for b in row))
