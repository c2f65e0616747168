"""
Learned temperature and learned error bars
===========================================

Classification scores are divided by a learned temperature before the
softmax, and regression outputs carry a learned standard deviation. Both
are trained by plain negative log-likelihood.
"""
import numpy as np

from dptransfer.calibration import (calibrated_ce, entropy, gaussian_nll, positive_reparam,
                                    scaled_softmax)

###############################################################################
# The inverse temperature sharpens or flattens the posterior without moving
# its argmax.

z = np.array([2.0, 1.0, -0.5, 0.0])
for alpha in (0.0, 0.5, 1.0, 4.0):
    p = scaled_softmax(z, alpha)
    print(f"alpha={alpha:3.1f}  p={np.round(p, 3)}  entropy={entropy(p):.3f}")

###############################################################################
# Gradient descent on alpha alone: a wrong label pushes alpha toward 0
# (less confident), a right label pushes it up.

for label in (1, 3):
    alpha = 1.0
    for _ in range(200):
        alpha = max(0.0, alpha - 0.1 * calibrated_ce(z, alpha, label).grad_alpha)
    print(f"label {label}: learned alpha = {alpha:.3f}")

###############################################################################
# For a fixed error the Gaussian NLL is smallest when sigma equals |error|;
# at zero error the clamp stops sigma at sigma_min.

sigma_min = 0.01
grid = np.linspace(sigma_min, 3, 3000)[:, None]
for err in (0.0, 0.25, 1.5):
    losses = gaussian_nll(np.full_like(grid, err), grid, np.zeros_like(grid), sigma_min).loss
    print(f"|error|={err:4.2f}  best sigma={grid[np.argmin(losses), 0]:.3f}")

###############################################################################
# Positivity comes from a softplus on an unconstrained network output.

print([round(positive_reparam(r, sigma_min), 4) for r in (-30.0, -2.0, 0.0, 3.0)])
