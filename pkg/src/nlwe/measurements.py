"""Projective measurements on one party or a group of parties.

A :class:`Measurement` lists outcomes; each outcome is the span of a few
rational vectors, the complement of the other outcomes, or (only for the
certificates built in :mod:`nlwe.nonlocality`) an explicit Hermitian effect
given by its real and imaginary parts. Grouped targets act on the tensor
space of the grouped parties in ascending party order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import prod
from typing import Sequence

from .exactla import RMatrix, as_rational, dot, independent_subset, inverse, kron_vec, primitive
from .hilbert import PARTY_NAMES, ProductState, StructuralError
from .statesets import StateSet


class AnnihilatedState(Exception):
    def __init__(self, state_id: str, label: str):
        super().__init__(f"state {state_id} has no support on outcome {label}")
        self.state_id = state_id
        self.label = label


class NonProductResult(Exception):
    def __init__(self, state_id: str, label: str):
        super().__init__(f"outcome {label} maps {state_id} outside the product states")
        self.state_id = state_id
        self.label = label


@dataclass(frozen=True)
class Projector:
    dim: int
    entries: RMatrix


def projector_from_span(vectors: Sequence[Sequence]) -> Projector:
    """Orthogonal projector onto span(vectors), computed as V (V^T V)^-1 V^T."""
    vectors = [tuple(as_rational(x) for x in v) for v in vectors]
    if not vectors:
        raise ValueError("projector_from_span needs at least one vector")
    d = len(vectors[0])
    if any(len(v) != d for v in vectors):
        raise ValueError("spanning vectors differ in length")
    keep = [vectors[i] for i in independent_subset(vectors)]
    if not keep:
        return Projector(d, RMatrix.zeros(d, d))
    v = RMatrix.from_rows(keep).T
    gram = v.T @ v
    return Projector(d, v @ inverse(gram) @ v.T)


@dataclass(frozen=True)
class Outcome:
    label: str
    vectors: tuple = ()
    complement: bool = False
    effect: RMatrix | None = None
    effect_imag: RMatrix | None = None

    @property
    def kind(self) -> str:
        if self.complement:
            return "complement"
        if self.effect is not None:
            return "effect"
        return "span"


def span(label: str, *vectors) -> Outcome:
    return Outcome(label, tuple(tuple(as_rational(x) for x in v) for v in vectors))


def complement(label: str) -> Outcome:
    return Outcome(label, complement=True)


@dataclass(frozen=True)
class Measurement:
    target: tuple
    dims: tuple
    outcomes: tuple
    name: str = ""

    def __post_init__(self):
        target = tuple(int(k) for k in self.target)
        if not target or len(set(target)) != len(target):
            raise StructuralError("measurement target must be a nonempty set of parties")
        if len(self.dims) != len(target):
            raise StructuralError("one dimension per target party is required")
        order = sorted(range(len(target)), key=lambda i: target[i])
        object.__setattr__(self, "target", tuple(target[i] for i in order))
        object.__setattr__(self, "dims", tuple(int(self.dims[i]) for i in order))
        labels = [o.label for o in self.outcomes]
        if len(set(labels)) != len(labels):
            raise StructuralError("duplicate outcome labels")
        if sum(o.complement for o in self.outcomes) > 1:
            raise StructuralError("at most one complement outcome")
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    @property
    def dim(self) -> int:
        return prod(self.dims)

    @property
    def labels(self) -> tuple:
        return tuple(o.label for o in self.outcomes)

    @property
    def is_projective(self) -> bool:
        return all(o.effect is None for o in self.outcomes)

    def target_names(self) -> str:
        return ",".join(PARTY_NAMES[k] for k in self.target)

    @cached_property
    def operators(self) -> dict:
        """label -> (real part, imaginary part or None); built once per measurement."""
        d = self.dim
        ops = {}
        acc = RMatrix.zeros(d, d)
        for o in self.outcomes:
            if o.complement:
                continue
            if o.effect is not None:
                if o.effect.shape != (d, d):
                    raise StructuralError(f"effect {o.label} has shape {o.effect.shape}, expected {d}x{d}")
                ops[o.label] = (o.effect, o.effect_imag)
            else:
                if any(len(v) != d for v in o.vectors):
                    raise StructuralError(f"outcome {o.label} vectors are not of dimension {d}")
                ops[o.label] = (projector_from_span(o.vectors).entries, None)
            acc = acc + ops[o.label][0]
        for o in self.outcomes:
            if o.complement:
                ops[o.label] = (RMatrix.identity(d) - acc, None)
        return {o.label: ops[o.label] for o in self.outcomes}

    def projector(self, label: str) -> RMatrix:
        return self.operators[label][0]


def local_measurement(party: int, dim: int, outcomes: Sequence[Outcome], name: str = "") -> Measurement:
    return Measurement((party,), (dim,), tuple(outcomes), name)


def check_completeness(m: Measurement, dim: int | None = None) -> bool:
    """Outcome operators sum to the identity and projective outcomes are projectors."""
    if dim is not None and dim != m.dim:
        return False
    ops = m.operators
    d = m.dim
    total_re = RMatrix.zeros(d, d)
    total_im = RMatrix.zeros(d, d)
    for o in m.outcomes:
        re, im = ops[o.label]
        total_re = total_re + re
        if im is not None:
            total_im = total_im + im
        if o.effect is None and (re @ re != re or not re.is_symmetric()):
            return False
        if o.effect is not None and not gershgorin_psd(re, im):
            return False
    return total_re == RMatrix.identity(d) and total_im.is_zero()


def gershgorin_psd(re: RMatrix, im: RMatrix | None = None) -> bool:
    """Sufficient PSD test for a Hermitian matrix ``re + i*im``: diagonal dominance.

    Each diagonal entry must be at least the sum of ``|re_ij| + |im_ij|`` over
    the rest of its row; the Gershgorin discs then lie in ``[0, inf)``.
    """
    if not re.is_symmetric():
        return False
    if im is not None and im.T != -im:
        return False
    n = re.rows
    for i in range(n):
        off = sum(abs(re[i, j]) for j in range(n) if j != i)
        if im is not None:
            off += sum(abs(im[i, j]) for j in range(n) if j != i)
        if re[i, i] < off:
            return False
    return True


def _split(s: ProductState, target: tuple):
    tvec = kron_vec(*(s.locals[k] for k in target))
    return tvec


def _rest_overlap(s: ProductState, t: ProductState, target: tuple) -> Fraction:
    out = Fraction(1)
    for k, (u, v) in enumerate(zip(s.locals, t.locals)):
        if k in target:
            continue
        x = dot(u, v)
        if not x:
            return Fraction(0)
        out *= x
    return out


def _check_fits(s: StateSet, m: Measurement):
    for k, d in zip(m.target, m.dims):
        if k >= s.spec.n_parties:
            raise StructuralError(f"measurement acts on party {PARTY_NAMES[k]} not present in the set")
        if s.spec.party_dims[k] != d:
            raise StructuralError(
                f"measurement expects dimension {d} on party {PARTY_NAMES[k]}, set has {s.spec.party_dims[k]}"
            )


def _bilinear(op: RMatrix, u: Sequence, v: Sequence) -> Fraction:
    return dot(u, op.apply(v))


def op_violations(s: StateSet, m: Measurement) -> list[tuple[str, str, str]]:
    """(outcome, id_i, id_j) for every pair the outcome fails to keep orthogonal."""
    _check_fits(s, m)
    ops = m.operators
    tvecs = [_split(x, m.target) for x in s.states]
    images = {
        label: [(re.apply(t), None if im is None else im.apply(t)) for t in tvecs]
        for label, (re, im) in ops.items()
    }
    out = []
    st = s.states
    for i in range(len(st)):
        for j in range(i + 1, len(st)):
            rest = _rest_overlap(st[i], st[j], m.target)
            if not rest:
                continue
            for label in m.labels:
                re_img, im_img = images[label][j]
                if dot(tvecs[i], re_img) or (im_img is not None and dot(tvecs[i], im_img)):
                    out.append((label, st[i].id, st[j].id))
    return out


def is_orthogonality_preserving(s: StateSet, m: Measurement) -> bool:
    """True iff ``<i| E (x) I |j> = 0`` for every outcome E and every pair i != j.

    For a projective outcome this is exactly the statement that the projected
    states stay pairwise orthogonal.
    """
    return not op_violations(s, m)


def supported_outcomes(state: ProductState, m: Measurement) -> list[str]:
    """Outcomes with nonzero probability on ``state`` (projective measurements)."""
    t = _split(state, m.target)
    return [label for label in m.labels if _bilinear(m.operators[label][0], t, t)]


def factor_product(vec: Sequence, dims: Sequence[int]) -> tuple | None:
    """Split a vector of the tensor space into per-factor vectors, or None if entangled."""
    dims = tuple(dims)
    vec = tuple(as_rational(x) for x in vec)
    if len(dims) == 1:
        return (vec,)
    d1 = dims[0]
    rest = prod(dims[1:])
    mat = [vec[i * rest:(i + 1) * rest] for i in range(d1)]
    i0 = next((i for i in range(d1) if any(mat[i])), None)
    if i0 is None:
        return None
    j0 = next(j for j in range(rest) if mat[i0][j])
    u = tuple(mat[i][j0] for i in range(d1))
    w = mat[i0]
    pivot = mat[i0][j0]
    for i in range(d1):
        for j in range(rest):
            if mat[i][j] * pivot != u[i] * w[j]:
                return None
    tail = factor_product(w, dims[1:])
    if tail is None:
        return None
    return (u,) + tail


def apply_outcome(s: StateSet, m: Measurement, label: str) -> StateSet:
    """Post-measurement set for one outcome; target locals are projected and rescaled.

    Raises AnnihilatedState if some state has no support on the outcome and
    NonProductResult if a grouped projection is no longer a product.
    """
    _check_fits(s, m)
    if not m.is_projective:
        raise StructuralError("apply_outcome needs a projective measurement")
    op = m.projector(label)
    out = []
    for st in s.states:
        t = _split(st, m.target)
        img = op.apply(t)
        if not any(img):
            raise AnnihilatedState(st.id, label)
        parts = factor_product(img, m.dims)
        if parts is None:
            raise NonProductResult(st.id, label)
        locs = list(st.locals)
        for k, part in zip(m.target, parts):
            locs[k] = primitive(part)
        out.append(ProductState(st.id, tuple(locs)))
    return s.replace(out)


def is_trivial(m: Measurement) -> bool:
    """Every outcome operator is a scalar multiple of the identity."""
    d = m.dim
    for re, im in m.operators.values():
        if im is not None and not im.is_zero():
            return False
        c = re[0, 0]
        if re != RMatrix.identity(d).scale(c):
            return False
    return True


def identity_measurement(s_or_dims, party: int = 0, label: str = "I") -> Measurement:
    dim = s_or_dims if isinstance(s_or_dims, int) else s_or_dims.spec.party_dims[party]
    return local_measurement(party, dim, [complement(label)], "identity")


def block_measurement(party: int, dim: int, blocks: dict, name: str = "") -> Measurement:
    """Measurement whose outcomes project onto coordinate blocks, e.g. {"K1": (0, 1, 2)}."""
    outs = []
    for label, idxs in blocks.items():
        vecs = []
        for i in idxs:
            v = [0] * dim
            v[i] = 1
            vecs.append(v)
        outs.append(span(label, *vecs))
    return local_measurement(party, dim, outs, name)
