"""Communication graphs and the averaging matrices that live on them.

The contraction rate mu is the whole story for gossip averaging: after
t steps every agent is within sqrt(n) * mu^t * (value scale) of the true
mean. The table at the end shows the measured worst row deviation of
W^t shrinking geometrically inside that envelope.
"""

import numpy as np

from distgreedy import (
    contraction_bound_check,
    diameter,
    generate,
    lazy_max_degree_weights,
    metropolis_weights,
    spectral_mu,
    uniform_complete_weights,
    validate_mixing,
)

for kind, n in [("path", 5), ("cycle", 6), ("complete", 5), ("grid", 6)]:
    G = generate(kind, n)
    M = metropolis_weights(G)
    print(f"{kind:9s} n={n}: diameter={diameter(G)}, "
          f"metropolis mu={M.mu:.4f}, "
          f"lazy-max-degree mu={lazy_max_degree_weights(G).mu:.4f}")

G = generate("path", 3)
M = metropolis_weights(G)
print("\nmetropolis weights on the 3-path:")
print(np.array_str(M.W, precision=4))
print("valid:", validate_mixing(M.W, G).passed)
print("contraction rate (eigensolver):", spectral_mu(M.W))

U = uniform_complete_weights(4)
print("\nuniform weights on a 4-clique average exactly in one step:")
x = np.array([4.0, 0.0, 1.0, 3.0])
print("  x      =", x, " -> W @ x =", U.W @ x)

print("\nworst row deviation of W^t vs the sqrt(n) * mu^t envelope (3-path):")
report = contraction_bound_check(M, 12)
print(f"  {'t':>2s}  {'measured':>10s}  {'envelope':>10s}")
for t, measured, bound, _ in report.rows:
    print(f"  {t:2d}  {measured:10.2e}  {bound:10.2e}")
print("all inside:", report.passed)
