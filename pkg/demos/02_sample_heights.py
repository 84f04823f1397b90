"""Sample the colored lattice model and print its height functions.

Colored paths enter on the left boundary with random multiplicities and
migrate up-right through stochastic vertices whose probabilities carry
column, row, and diagonal parameters.  The height function h_{>=c}(x, y)
counts paths of color >= c passing below the facet (x, y).
"""


from qhahn_polymer.model import QHahnModel, height_field, sample_grid
from qhahn_polymer.qtools import spawn_rng

model = QHahnModel(
    q=0.55,
    mu=(2.3, 2.35, 2.4, 2.45, 2.5),
    kappa=(1.3, 1.34, 1.38, 1.42),
    lam=(0.2, 0.22, 0.24, 0.26),
    colors=(1, 2, 1),  # one path of color 1, two of color 2, one of color 3
)

rng = spawn_rng(7)
cfg = sample_grid(model, rng)
cfg.check_conservation()

print("Boundary multiplicities b_j (row: color x count):")
for j in range(1, model.size + 1):
    comp = cfg.B[(0, j)]
    print(f"  row {j}: color {model.row_color(j)} x {sum(comp)}")

for c in (1, 2, 3):
    H = height_field(cfg, c)
    print(f"\nheight h_>= {c} (rows = facet y from top, columns = facet x):")
    for iy in range(model.size, -1, -1):
        print("   " + " ".join(f"{H[ix, iy]:2d}" for ix in range(model.size + 1)))

print("\nDiagonal facets have height 0; the left column accumulates the")
print("boundary multiplicities of colors >= c.")
