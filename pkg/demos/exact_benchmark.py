# coding: utf-8

# # How good is the Gaussian prediction approximation?
#
# The operational filter treats the state prediction as Gaussian.  A grid
# filter propagates the exact predictive density instead, so the two can be
# compared step by step.

import numpy as np

from gausscauchy.exact_bench import (correction_diagnostics, design_params, exact_filter,
                                     kl_diagnostics)
from gausscauchy.ssm import simulate_ssm

for lam in (0.0, 0.1, 1.0):
    p = design_params(lam, phi=0.97, tau_ratio=0.5)
    y = simulate_ssm(p, T=500, seed=0).y
    ex = exact_filter(y, p)
    kl = kl_diagnostics(ex, p).means()
    cd = correction_diagnostics(ex, p).summary()
    print(f"lambda={lam:4.2f}  KL_x_op={kl['kl_x_op']:.2e}  KL_y_op={kl['kl_y_op']:.2e}  "
          f"MAE_op={cd['mae_op']:.2e}")


# # A single predictive density
#
# At a date just after an outlier the exact predictive density is visibly
# non-Gaussian; its moments still sit close to the operational ones.

p = design_params(1.0, phi=0.97, tau_ratio=0.5)
y = simulate_ssm(p, T=500, seed=0).y
ex = exact_filter(y, p)
t = int(np.argmax(np.abs(np.diff(y)))) + 2
d = ex.density(t)
print(f"t={t}: exact mean {ex.x_pred[t]:.4f}, variance {ex.h_pred[t]:.4f}, mass {d.norm:.12f}")
