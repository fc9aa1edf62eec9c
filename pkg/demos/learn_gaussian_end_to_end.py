"""Learn an unknown Gaussian (mean and covariance) under a single zCDP budget
and report the total-variation distance between the estimate and the truth."""

import numpy as np

from privest import (GaussianParams, NoiseSource, learn_gaussian,
                     sample_gaussian, tv_gaussian_mc)

d, n = 4, 400_000
rho = 1.0
sigma = np.diag([1.0, 5.0, 20.0, 100.0])
mu = np.array([1.5, -0.5, 2.0, 0.0])
truth = GaussianParams(mu, sigma)

x = mu + sample_gaussian(GaussianParams(np.zeros(d), sigma), n, NoiseSource(0))
mean_est, cov_est = learn_gaussian(x, rho, 0.1, 0.05, 5.0, 100.0,
                                   NoiseSource(1))

print(f"budget: rho = {mean_est.budget_spent.rho + cov_est.budget_spent.rho:g}"
      f" (mean {mean_est.budget_spent.rho:g} + cov {cov_est.budget_spent.rho:g})")
if mean_est.aborted:
    print("mean stage aborted (bottom outcome); nothing was released")
else:
    print("mu_hat      ", np.round(mean_est.mu_hat, 3))
    print("diag(Sigma^) ", np.round(np.diag(cov_est.sigma_hat), 2))
    tv, se = tv_gaussian_mc(truth,
                            GaussianParams(mean_est.mu_hat, cov_est.sigma_hat),
                            20_000, NoiseSource(2))
    print(f"TV(truth, estimate) = {tv:.4f} +- {se:.4f}")
