"""Exact certificates that no nontrivial orthogonality-preserving measurement exists.

For every grouping of parties the certificate is the dimension of the
solution space of a linear system over the rationals. (1, 0) means only
multiples of the identity survive.
"""
import time

from nlwe.nonlocality import certify_strong_irreducibility, materialize_nontrivial_opm, opm_solution_dims
from nlwe.measurements import is_orthogonality_preserving
from nlwe.statesets import build_named

for name in ("strong:0,1,2", "strong7:4,5,3"):
    t0 = time.perf_counter()
    rep = certify_strong_irreducibility(build_named(name))
    print(f"{name}: {rep.verdict}  ({time.perf_counter() - t0:.2f} s)")
    for c in rep.certificates:
        print(f"   {c.grouping_names:3} dim {c.dim:3}  solutions ({c.sym_dim}, {c.antisym_dim})")

print("\nShifts, for contrast:")
shifts = build_named("shifts")
for g in ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2)):
    print("  ", g, opm_solution_dims(shifts, g))
m, restricted = materialize_nontrivial_opm(shifts, (0, 1))
print("a nontrivial two-outcome OPM on AB exists and preserves orthogonality:",
      is_orthogonality_preserving(restricted, m))
