"""Line-oriented text formats for state sets, measurements and protocol trees.

State set::

    parties 3 6 ; factors p#2: 2*3
    psi1 | 1,0,0 | 1,-1,0,0,1,-1

Parties in ``p#i`` are numbered from 1. Measurement (one line)::

    target: B ; outcome K1: span [1,0,0,0,0,0] [0,1,0,0,0,0] ; outcome K2: complement

Protocol: ``measurement <name> = <measurement line>`` definitions followed by
one nested tree expression::

    node party=B measure=N_B { N1 -> leaf{psi3}, N4 -> leaf{psi1,psi2} }

Blank lines and lines starting with ``#`` are ignored everywhere.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .hilbert import PARTY_NAMES, PartySpec, ProductState
from .measurements import Measurement, Outcome
from .protocols import Leaf, Node
from .statesets import StateSet


class FormatError(ValueError):
    pass


def _fmt_num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_vec(v) -> str:
    return ",".join(_fmt_num(Fraction(x)) for x in v)


def _parse_vec(text: str) -> tuple:
    try:
        return tuple(Fraction(x.strip()) for x in text.split(",") if x.strip() != "")
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad vector {text!r}") from exc


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


# ------------------------------------------------------------ state sets


def format_stateset(s: StateSet) -> str:
    head = "parties " + " ".join(str(d) for d in s.spec.party_dims)
    facs = [
        f"p#{k + 1}: " + "*".join(str(x) for x in f)
        for k, f in enumerate(s.spec.factorizations) if f is not None
    ]
    if facs:
        head += " ; factors " + ", ".join(facs)
    out = [head]
    for st in s.states:
        out.append(" | ".join([st.id] + [_fmt_vec(v) for v in st.locals]))
    return "\n".join(out) + "\n"


def parse_stateset(text: str) -> StateSet:
    lines = list(_lines(text))
    if not lines:
        raise FormatError("empty state-set file")
    head = lines[0]
    m = re.fullmatch(r"parties\s+([\d\s]+?)\s*(?:;\s*factors\s*(.*))?", head)
    if not m:
        raise FormatError(f"bad header {head!r}")
    dims = tuple(int(x) for x in m.group(1).split())
    facs = [None] * len(dims)
    if m.group(2):
        for part in m.group(2).split(","):
            fm = re.fullmatch(r"\s*p#(\d+)\s*:\s*([\d\s*]+)\s*", part)
            if not fm:
                raise FormatError(f"bad factorization {part!r}")
            k = int(fm.group(1)) - 1
            if not 0 <= k < len(dims):
                raise FormatError(f"factorization names party {k + 1} of {len(dims)}")
            facs[k] = tuple(int(x) for x in fm.group(2).split("*"))
    try:
        spec = PartySpec(dims, tuple(facs))
        states = []
        for line in lines[1:]:
            fields = [f.strip() for f in line.split("|")]
            if len(fields) != len(dims) + 1:
                raise FormatError(f"state line {line!r} does not have {len(dims)} local vectors")
            states.append(ProductState(fields[0], tuple(_parse_vec(f) for f in fields[1:])))
        return StateSet(spec, tuple(states))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# ------------------------------------------------------------ measurements


def format_measurement(m: Measurement) -> str:
    parts = ["target: " + m.target_names()]
    for o in m.outcomes:
        if o.complement:
            parts.append(f"outcome {o.label}: complement")
        elif o.effect is not None:
            raise FormatError("explicit effect operators have no text form")
        else:
            parts.append(f"outcome {o.label}: span " + " ".join(f"[{_fmt_vec(v)}]" for v in o.vectors))
    return " ; ".join(parts)


def parse_measurement(line: str, spec: PartySpec | None = None, dims: dict | None = None,
                      name: str = "") -> Measurement:
    """Parse one measurement line.

    Party dimensions come from ``spec`` when given; otherwise they are read
    off the span vectors (a grouped target then needs ``dims``).
    """
    chunks = [c.strip() for c in line.split(";")]
    tm = re.fullmatch(r"target:\s*([A-Za-z](?:\s*,\s*[A-Za-z])*)", chunks[0])
    if not tm:
        raise FormatError(f"bad target in {line!r}")
    target = tuple(PARTY_NAMES.index(x.strip().upper()) for x in tm.group(1).split(","))
    outcomes = []
    width = None
    for c in chunks[1:]:
        om = re.fullmatch(r"outcome\s+(\S+?)\s*:\s*(complement|span\s+(.*))", c)
        if not om:
            raise FormatError(f"bad outcome {c!r}")
        label = om.group(1)
        if om.group(2) == "complement":
            outcomes.append(Outcome(label, complement=True))
            continue
        vecs = tuple(_parse_vec(v) for v in re.findall(r"\[([^\]]*)\]", om.group(3)))
        if not vecs:
            raise FormatError(f"outcome {label} spans no vectors")
        width = len(vecs[0])
        outcomes.append(Outcome(label, vecs))
    if spec is not None:
        tdims = tuple(spec.party_dims[k] for k in target)
    elif dims is not None:
        tdims = tuple(dims[k] for k in target)
    elif len(target) == 1 and width is not None:
        tdims = (width,)
    else:
        raise FormatError("cannot infer the target dimension")
    return Measurement(target, tdims, tuple(outcomes), name)


# ------------------------------------------------------------ protocols


def format_protocol(tree) -> str:
    names: dict = {}
    defs: list = []

    def name_of(m: Measurement) -> str:
        for nm, other in names.items():
            if other == m:
                return nm
        base = m.name or "M"
        nm, k = base, 2
        while nm in names:
            nm, k = f"{base}#{k}", k + 1
        names[nm] = m
        defs.append(f"measurement {nm} = {format_measurement(m)}")
        return nm

    def render(t, indent):
        pad = "  " * indent
        if isinstance(t, Leaf):
            return "leaf{" + ",".join(t.candidates) + "}"
        nm = name_of(t.measurement)
        kids = [f"{pad}  {label} -> {render(t.children[label], indent + 1)}"
                for label in t.measurement.labels if label in t.children]
        return f"node party={PARTY_NAMES[t.party]} measure={nm} {{\n" + ",\n".join(kids) + f"\n{pad}}}"

    body = render(tree, 0)
    return "\n".join(defs + [body]) + "\n"


_TOKEN = re.compile(r"leaf\{[^}]*\}|\{|\}|,|->|[^\s{},]+")


def parse_protocol(text: str, spec: PartySpec | None = None):
    measures: dict = {}
    body = []
    for line in _lines(text):
        if line.startswith("measurement "):
            m = re.fullmatch(r"measurement\s+(\S+)\s*=\s*(.*)", line)
            if not m:
                raise FormatError(f"bad measurement definition {line!r}")
            measures[m.group(1)] = (m.group(2), m.group(1))
        else:
            body.append(line)
    tokens = _TOKEN.findall(" ".join(body))
    pos = 0

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise FormatError("unexpected end of protocol")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise FormatError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    def tree():
        tok = take()
        if tok.startswith("leaf{"):
            ids = [x.strip() for x in tok[5:-1].split(",") if x.strip()]
            return Leaf(tuple(ids))
        if tok != "node":
            raise FormatError(f"expected node or leaf, found {tok!r}")
        pt = take()
        mt = take()
        if not pt.startswith("party=") or not mt.startswith("measure="):
            raise FormatError("node needs party=<X> measure=<name>")
        party = PARTY_NAMES.find(pt[6:].upper())
        if party < 0 or len(pt) != 7:
            raise FormatError(f"bad party {pt!r}")
        mname = mt[8:]
        if mname not in measures:
            raise FormatError(f"undefined measurement {mname!r}")
        line, nm = measures[mname]
        meas = parse_measurement(line, spec, name=nm)
        take("{")
        children = {}
        while tokens[pos] != "}":
            label = take()
            take("->")
            children[label] = tree()
            if tokens[pos] == ",":
                take(",")
        take("}")
        return Node(party, meas, children)

    result = tree()
    if pos != len(tokens):
        raise FormatError(f"trailing tokens after the protocol tree: {tokens[pos:]}")
    return result
