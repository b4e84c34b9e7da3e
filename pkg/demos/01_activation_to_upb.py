"""A locally distinguishable set turns into a UPB after one local measurement.

Bob splits his six-dimensional space into two qutrit blocks. Each block
leaves Alice and Bob holding the five-state Tiles basis, which no LOCC
protocol can discriminate.
"""
from nlwe.activation import RelabelingMap, apply_relabel, k_measurement, match_sets
from nlwe.measurements import apply_outcome, is_orthogonality_preserving
from nlwe.nonlocality import check_upb
from nlwe.protocols import build_g1_protocol, simulate
from nlwe.statesets import build_g1, build_tiles_upb

g1 = build_g1()
print("G1 discriminated by a single measurement on Bob:",
      simulate(g1, build_g1_protocol()).distinguished)

k = k_measurement(1)
print("K on Bob preserves orthogonality:", is_orthogonality_preserving(g1, k))

tiles = build_tiles_upb()
relabels = {
    "K1": RelabelingMap.on_party(2, 1, {0: 0, 1: 1, 2: 2}, 3),
    "K2": RelabelingMap.on_party(2, 1, {3: 2, 4: 0, 5: 1}, 3),
}
for label in ("K1", "K2"):
    out = apply_outcome(g1, k, label)
    print(f"\noutcome {label}:")
    for st in out:
        print("  ", st.id, [list(map(int, v)) for v in st.locals])
    res = match_sets(out, tiles, relabels[label])
    print("  matches Tiles:", res.matched, res.bijection)
    # inside Bob's six dimensions the unused block always extends the set;
    # unextendibility is a statement about the qutrit the outcome leaves behind
    print("  unextendible on the qutrit block:", check_upb(apply_relabel(out, relabels[label])).is_upb)
