"""The distortion calculus: p, mu, delta, eta, alpha.

The quotient p compares the pushforward of the radial unit field with the
field at the image point.  Its defect from 1 splits into the Moebius
distortion mu = 1 - |p|, the vertical inefficiency eta = Re(1 - p) and
the inclination alpha = |arg p|, with delta = |1 - p| <= alpha + eta.
The integral of eta along a radius is bounded by log |F'(zeta)|, and the
mu-integral converges exactly when the angular derivative is finite.
"""

import numpy as np

from innerlab import distortion
from innerlab.innerfn import InnerModel

F = InnerModel.from_zeros(0, 0.5)

print("samples along the ray to zeta = 1:")
print(f"{'r':>6} {'mu':>10} {'delta':>10} {'eta':>10} {'alpha':>10}")
for r in (0.3, 0.6, 0.9, 0.99, 0.9999):
    s = distortion.distortion_at_disk(F, r * np.exp(0.0j))
    print(f"{r:>6} {s.mu:>10.6f} {s.delta:>10.6f} {s.eta:>10.6f} {s.alpha:>10.6f}")

bound = np.log(F.boundary_deriv_modulus(0.0))
print(f"\nradial inefficiency integral vs log |F'(1)| = {bound:.6f}:")
for r_max in (0.9, 0.99, 1 - 1e-4, 1 - 1e-6):
    v = distortion.radial_distortion_integral(F, 1.0 + 0j, "eta", r_max)
    print(f"  int_0^{r_max} eta d rho = {v:.8f}")

print("\nangular-derivative dichotomy (mu-integral at zeta = 1):")
family = [InnerModel.from_zeros(*[1 - 2.0 ** -k for k in range(1, K + 1)])
          for K in (3, 6, 9, 12)]
rows = distortion.angular_derivative_criterion_scan(family, 1.0 + 0j,
                                                    [1 - 1e-4])
for row, K in zip(rows, (3, 6, 9, 12)):
    print(f"  K = {K:>2}: int mu d rho = {row.integral_mu:>7.3f}   "
          f"log |F'(1)| = {row.log_angular_derivative:>7.3f}")
print("the integral tracks log |F'(1)| and diverges with the truncation")
print("order, exactly as the finite-angular-derivative criterion predicts.")
