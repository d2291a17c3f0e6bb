# coding: utf-8

# # The Voigt distribution
#
# A Voigt variable is the sum of a normal and an independent Cauchy variable.
# Its density has no elementary closed form, but it is the real part of the
# scaled complementary error function evaluated on a line in the complex plane.

import numpy as np

from gausscauchy.mle import fit
from gausscauchy.voigt import (VoigtParams, conditional_moments, fisher_information, log_pdf,
                               pdf, sample, score)

theta = VoigtParams(mu=0.0, sigma=1.0, gamma=1.0)
y = np.array([0.0, 1.0, 3.0, 10.0, 1e3])
print("density  ", pdf(y, theta))
print("log dens ", log_pdf(y, theta))


# # Signal extraction
#
# Given an observation, how much of it belongs to the Gaussian part?  The
# conditional mean rises, peaks and then falls back to zero: a large
# observation is almost entirely attributed to the Cauchy part.

grid = np.array([0.0, 1.0, 2.46, 5.0, 20.0, 200.0])
m = conditional_moments(grid, theta)
for yi, mean, var in zip(grid, m.mean, m.variance):
    print(f"y = {yi:7.2f}   E[Z|y] = {mean:8.5f}   V[Z|y] = {var:8.5f}")


# # Scores far in the tails
#
# The location score decays like 2/y, so extreme points have bounded influence.

s = score(np.array([10.0, 100.0, 1000.0]), theta)
print("s_mu * y:", s.s_mu * np.array([10.0, 100.0, 1000.0]))


# # Fisher information and the MLE
#
# Information is computed by quadrature after mapping the real line onto a
# finite interval.  The fitted standard errors come from it.

truth = VoigtParams(1.0, 1.0, 0.1)
info = fisher_information(truth)
print("per-observation aStd:", info.astd)

data = sample(truth, 10_000, seed=1)
res = fit(data)
print("estimate:", res.theta_hat.as_array(), "+/-", res.std_errors)
