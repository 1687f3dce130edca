"""An inner function that misses a point: no preimages to count.

The singular factor S(z) = exp(-(1+z)/(1-z)) omits the value 0.
Centering it with a Frostman shift gives an inner function G with
G(0) = 0 that omits p = -S(0), so the repeated-preimage set of p is
empty and N(p, R) = 0 for every R.  Preimage enumeration through atom
factors is out of scope (the map is infinite-to-one near the atom), so
the omission is demonstrated by the argument principle: the winding
number of G - q around |z| = r counts the preimages of q inside, and it
stays 0 for q = p while growing without bound for any other value.
"""

import numpy as np

from innerlab.innerfn import InnerModel, frostman_shift


def winding(S, a, q, r, samples=400000):
    """Winding of G - q along |z| = r for G = (S - a)/(1 - conj(a) S).

    Uses the cancellation-free Moebius form
    G - q = [S (1 + conj(a) q) - (a + q)]/(1 - conj(a) S), on a grid
    warped toward the atom at angle 0 (theta = (1-r) tan w equidistributes
    the phase speed there); near the atom |G - q| can be ~1e-88, far below
    what the naive difference resolves.
    """
    w_max = np.arctan(np.pi / (1.0 - r))
    w = np.linspace(-w_max, w_max, samples)
    theta = (1.0 - r) * np.tan(w)
    s_vals = S.eval(r * np.exp(1j * theta))
    vals = (s_vals * (1.0 + np.conj(a) * q) - (a + q)) / (1.0 - np.conj(a) * s_vals)
    arg = np.unwrap(np.angle(vals))
    return int(np.round((arg[-1] - arg[0]) / (2 * np.pi)))


S = InnerModel.atom_map(0.0, 1.0)        # exp(-(1+z)/(1-z))
a = S.eval(0.0)                          # e^-1
G = frostman_shift(S, a)                 # G(0) = 0
p = -a                                   # the omitted value of G
q = 0.2 + 0j                             # any other value is hit repeatedly

print(f"G = Frostman shift of the atom model by a = {a.real:.6f}; "
      f"|G(0)| = {abs(G.eval(0.0)):.1e}")
print(f"omitted value p = {p.real:.6f}; comparison value q = {q.real}")
# Beyond r ~ 0.997 the factor S itself underflows doubles near the atom
# (|S| < e^-745) and its phase becomes unrepresentable in linear form.
print(f"\n{'r':>8} {'# preimages of p':>17} {'# preimages of q':>17}")
for r in (0.3, 0.6, 0.9, 0.99, 0.997):
    print(f"{r:>8} {winding(S, a, p, r):>17} {winding(S, a, q, r):>17}")

print("\nN(p, R) = 0 at every radius while other values accumulate")
print("infinitely many preimages near the atom: the counting theorems")
print("hold only outside a null set of base points.")
