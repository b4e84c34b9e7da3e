"""Command-line front end: ``build``, ``verify`` and ``report-all``.

Exit codes: 0 when every check passes, 1 when some check fails, 2 for usage
errors, unreadable input, enumeration guards and timeouts.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .activation import THEOREMS
from .exactla import RMatrix, rank
from .hilbert import PARTY_NAMES
from .nonlocality import (
    EnumerationTooLarge,
    certify_grouping,
    certify_strong_irreducibility,
    check_local_redundancy,
    check_upb,
    materialize_nontrivial_opm,
    opm_solution_dims,
)
from .measurements import check_completeness, is_orthogonality_preserving
from .protocols import PROTOCOLS, simulate
from .statesets import build_named, check_orthogonality
from .textio import FormatError, format_stateset, parse_protocol, parse_stateset

SET_CHECKS = ("orthogonality", "redundancy", "protocol", "upb", "irreducibility")
GLOBAL_CHECKS = ("theorem1", "theorem2", "theorem3", "theorem4", "contrast", "kernel")
CHECKS = SET_CHECKS + GLOBAL_CHECKS + ("all",)

SUITE = (
    [("orthogonality", n) for n in ("g1", "g2", "g3", "g4", "tiles", "shifts")]
    + [("redundancy", n) for n in ("g1", "g2", "g3", "g4")]
    + [("protocol", n) for n in ("g1", "g2", "g3", "g4")]
    + [("upb", n) for n in ("tiles", "shifts")]
    + [("irreducibility", n) for n in ("strong:0,1,2", "strong7:0,1,2")]
    + [(t, None) for t in GLOBAL_CHECKS]
)

EXIT = {"pass": 0, "fail": 1, "error": 2}


class UsageError(Exception):
    pass


@dataclass
class CheckResult:
    status: str
    summary: str
    witnesses: list = field(default_factory=list)
    certificate: dict = field(default_factory=dict)


def _plain(x):
    """JSON-friendly copy with deterministic ordering."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted(_plain(v) for v in x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _dump(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ------------------------------------------------------------ checks


def check_orthogonality_cmd(s, **_):
    bad = check_orthogonality(s)
    n = len(s)
    wit = [{"pair": [a, b], "inner_product": ip} for a, b, ip in bad]
    cert = {"states": n, "pairs_checked": n * (n - 1) // 2}
    if bad:
        return CheckResult("fail", f"{len(bad)} non-orthogonal pair(s), first {bad[0][0]},{bad[0][1]}", wit, cert)
    return CheckResult("pass", f"{cert['pairs_checked']} pairs orthogonal", wit, cert)


def check_redundancy_cmd(s, **_):
    rep = check_local_redundancy(s)
    wit = []
    empty = []
    for p in rep.patterns:
        wit.append({
            "discarded": list(p.discarded),
            "witness_count": len(p.witnesses),
            "witnesses": [list(w) for w in p.witnesses[:3]],
        })
        if not p.witnesses:
            empty.append("+".join(p.discarded))
    cert = {"patterns": len(rep.patterns)}
    if empty:
        return CheckResult("fail", f"orthogonality survives discarding {', '.join(empty)}", wit, cert)
    return CheckResult("pass", f"all {len(rep.patterns)} discard patterns break orthogonality", wit, cert)


def check_protocol_cmd(s, tree=None, **_):
    rep = simulate(s, tree)
    d = rep.to_dict()
    wit = [
        {"state": k, "verdict": v["verdict"], "reasons": v["reasons"], "leaves": v["leaves"]}
        for k, v in d["states"].items() if v["verdict"] != "distinguished"
    ]
    cert = {
        "distinguished": rep.distinguished,
        "perfectly_discriminated": rep.perfectly_discriminated,
        "nodes": d["nodes"],
        "leaves": d["leaves"],
        "errors": d["errors"],
    }
    if rep.distinguished:
        return CheckResult("pass", f"{len(s)} states distinguished at {len(rep.nodes)} nodes", wit, cert)
    return CheckResult("fail", f"{len(wit)} state(s) not deterministically distinguished", wit, cert)


def check_upb_cmd(s, **_):
    v = check_upb(s)
    cert = {"assignments_checked": v.assignments_checked, "parties": s.spec.n_parties, "states": len(s)}
    if v.is_upb:
        return CheckResult("pass", f"unextendible ({v.assignments_checked} assignments)", [], cert)
    wit = [{"orthogonal_product_state": list(v.witness), "assignment": v.assignment}]
    return CheckResult("fail", "extendible: an orthogonal product state exists", wit, cert)


def check_irreducibility_cmd(s, **_):
    if s.spec.n_parties >= 3:
        certs = certify_strong_irreducibility(s).certificates
    else:
        certs = [certify_grouping(s, (k,)) for k in range(s.spec.n_parties)]
    cert = {"certificates": [c.to_dict() for c in certs]}
    wit = [c.to_dict() for c in certs if not c.trivial_only]
    if not wit:
        return CheckResult("pass", f"trivial-OPM-only on all {len(certs)} groupings", [], cert)
    names = ", ".join(c.grouping_names for c in certs if not c.trivial_only)
    return CheckResult("fail", f"nontrivial OPM solutions on {names}", wit, cert)


def _theorem(name):
    def run(**_):
        rep = THEOREMS[name]()
        d = rep.to_dict()
        wit = [o for o in d["outcomes"] if not o["passed"]]
        ok = rep.passed
        msg = f"{len(d['outcomes'])} outcome(s) " + ("verified" if ok else f"with {len(wit)} failure(s)")
        return CheckResult("pass" if ok else "fail", msg, wit, d)
    return run


def check_contrast_cmd(**_):
    """Sets that do admit nontrivial OPMs, with the OPM built and checked."""
    g1 = build_named("g1")
    shifts = build_named("shifts")
    rows = []
    fails = []

    def record(name, s, grouping, expect_nontrivial):
        sd, ad = opm_solution_dims(s, grouping)
        nontrivial = (sd, ad) != (1, 0)
        row = {"set": name, "grouping": "".join(PARTY_NAMES[g] for g in grouping),
               "sym_dim": sd, "antisym_dim": ad, "nontrivial": nontrivial}
        if nontrivial:
            got = materialize_nontrivial_opm(s, grouping)
            if got is None:
                row["materialized"] = None
            else:
                m, restricted = got
                row["materialized"] = {
                    "complete": check_completeness(m),
                    "orthogonality_preserving": is_orthogonality_preserving(restricted, m),
                }
        rows.append(row)
        if expect_nontrivial is not None and nontrivial != expect_nontrivial:
            fails.append(row)
        if nontrivial and not (row.get("materialized") and all(row["materialized"].values())):
            fails.append(row)
        return row

    g1b = record("g1", g1, (1,), True)
    if g1b["sym_dim"] < 2:
        fails.append(g1b)
    for k in range(3):
        record("shifts", shifts, (k,), False)
    pairs = [record("shifts", shifts, g, None) for g in ((0, 1), (0, 2), (1, 2))]
    if not any(r["nontrivial"] for r in pairs):
        fails.append({"set": "shifts", "reason": "no two-party grouping admits a nontrivial OPM"})
    cert = {"groupings": rows}
    if fails:
        return CheckResult("fail", f"{len(fails)} contrast expectation(s) not met", fails, cert)
    return CheckResult("pass", f"{len(rows)} groupings as expected, nontrivial OPMs verified", [], cert)


def check_kernel_cmd(seed: int = 20240601, count: int = 200, **_):
    rng = random.Random(seed)
    wit = []
    for i in range(count):
        r, c = rng.randint(1, 20), rng.randint(1, 20)
        low_rank = rng.random() < 0.5
        if low_rank:
            k = rng.randint(1, min(r, c))
            a = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(r)]
            b = [[rng.randint(-3, 3) for _ in range(c)] for _ in range(k)]
            rows = [[sum(a[x][t] * b[t][y] for t in range(k)) for y in range(c)] for x in range(r)]
        else:
            rows = [[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)]
        m = RMatrix.from_rows(rows)
        got = {meth: rank(m, method=meth) for meth in ("bareiss", "rational", "modular")}
        if len(set(got.values())) != 1:
            wit.append({"matrix": i, "shape": [r, c], "ranks": got})
    cert = {"matrices": count, "seed": seed, "max_shape": [20, 20]}
    if wit:
        return CheckResult("fail", f"{len(wit)} rank disagreement(s)", wit, cert)
    return CheckResult("pass", f"{count} random matrices: all three rank methods agree", [], cert)


RUNNERS = {
    "orthogonality": check_orthogonality_cmd,
    "redundancy": check_redundancy_cmd,
    "protocol": check_protocol_cmd,
    "upb": check_upb_cmd,
    "irreducibility": check_irreducibility_cmd,
    "theorem1": _theorem("theorem1"),
    "theorem2": _theorem("theorem2"),
    "theorem3": _theorem("theorem3"),
    "theorem4": _theorem("theorem4"),
    "contrast": check_contrast_cmd,
    "kernel": check_kernel_cmd,
}


# ------------------------------------------------------------ orchestration


@dataclass
class Job:
    check: str
    target: str | None
    set_file: str | None = None
    protocol_file: str | None = None

    @property
    def label(self) -> str:
        return self.check if self.target is None else f"{self.check} {self.target}"


def _load_set(job: Job):
    if job.set_file is not None:
        return parse_stateset(Path(job.set_file).read_text())
    try:
        return build_named(job.target)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown set name {job.target!r}") from exc


def _run_job(job: Job) -> CheckResult:
    runner = RUNNERS[job.check]
    if job.check not in SET_CHECKS:
        return runner()
    s = _load_set(job)
    kwargs = {}
    if job.check == "protocol":
        if job.protocol_file is not None:
            kwargs["tree"] = parse_protocol(Path(job.protocol_file).read_text(), s.spec)
        elif job.set_file is None and job.target in PROTOCOLS:
            kwargs["tree"] = PROTOCOLS[job.target]()
        else:
            raise UsageError(f"no built-in protocol for {job.target!r}; pass --protocol <file>")
    return runner(s, **kwargs)


def _timed(job: Job) -> tuple[CheckResult, float]:
    t0 = time.perf_counter()
    try:
        res = _run_job(job)
    except EnumerationTooLarge as exc:
        res = CheckResult("error", f"enumeration guard: {exc}")
    except (UsageError, FormatError, OSError) as exc:
        res = CheckResult("error", f"input error: {exc}")
    except Exception as exc:  # a crashing check is reported, not propagated
        res = CheckResult("error", f"{type(exc).__name__}: {exc}")
    return res, (time.perf_counter() - t0) * 1000.0


def run_jobs(jobs, timeout_s: float, threads: int):
    """Run jobs (possibly concurrently) and return records in job order, plus a timed-out flag."""
    pool = ThreadPoolExecutor(max_workers=max(1, threads))
    futures = [pool.submit(_timed, j) for j in jobs]
    deadline = time.monotonic() + timeout_s
    records = []
    timed_out = False
    for job, fut in zip(jobs, futures):
        try:
            res, ms = fut.result(timeout=max(0.0, deadline - time.monotonic()))
        except FutureTimeout:
            res, ms = CheckResult("error", f"timed out after {timeout_s:g} s"), timeout_s * 1000.0
            timed_out = True
        records.append(_record(job, res, ms))
    pool.shutdown(wait=not timed_out, cancel_futures=True)
    return records, timed_out


def _record(job: Job, res: CheckResult, ms: float) -> dict:
    return {
        "check_name": job.check,
        "target": job.target,
        "status": res.status,
        "summary": res.summary,
        "witnesses": res.witnesses,
        "certificate": res.certificate,
        "wall_time_ms": round(ms, 3),
    }


def _sort_key(r):
    return (r["check_name"], r["target"] or "")


def worst_status(records) -> str:
    return max((r["status"] for r in records), key=EXIT.__getitem__, default="pass")


def make_report(command: str, inputs, records) -> dict:
    records = sorted(records, key=_sort_key)
    return {
        "tool": "nlwe",
        "tool_version": __version__,
        "command": command,
        "inputs": list(inputs),
        "status": worst_status(records),
        "checks": records,
    }


def _human(records, stream):
    for r in sorted(records, key=_sort_key):
        tgt = f" {r['target']}" if r["target"] else ""
        stream.write(f"{r['status'].upper():5} {r['check_name']}{tgt}: {r['summary']} "
                     f"({r['wall_time_ms']:.0f} ms)\n")


def _emit(report: dict, json_path: str | None):
    human = sys.stderr if json_path == "-" else sys.stdout
    _human(report["checks"], human)
    if json_path == "-":
        sys.stdout.write(_dump(report))
    elif json_path:
        Path(json_path).write_text(_dump(report))


# ------------------------------------------------------------ commands


def cmd_build(args) -> int:
    try:
        s = build_named(args.set_name)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown set name {args.set_name!r}") from exc
    text = format_stateset(s)
    if args.out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out_path).write_text(text)
        print(f"wrote {len(s)} states to {args.out_path}", file=sys.stderr)
    return 0


def _verify_jobs(args) -> list[Job]:
    check, target = args.check, args.target
    if check == "all":
        if target or args.set or args.protocol:
            raise UsageError("'verify all' runs the fixed suite and takes no set")
        return [Job(c, t) for c, t in SUITE]
    if check in GLOBAL_CHECKS:
        if target or args.set:
            raise UsageError(f"{check} takes no set")
        return [Job(check, None)]
    if args.set and target:
        raise UsageError("give either a set name or --set, not both")
    if args.set:
        return [Job(check, args.set, set_file=args.set, protocol_file=args.protocol)]
    if not target:
        raise UsageError(f"{check} needs a set name or --set <file>")
    try:
        build_named(target)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown set name {target!r}") from exc
    return [Job(check, target, protocol_file=args.protocol)]


def cmd_verify(args) -> int:
    jobs = _verify_jobs(args)
    records, timed_out = run_jobs(jobs, args.timeout_s, args.threads)
    cmd = " ".join(["verify", args.check] + ([args.target] if args.target else []))
    inputs = sorted({j.set_file or j.target for j in jobs if j.target} | {j.protocol_file for j in jobs if j.protocol_file})
    report = make_report(cmd, inputs, records)
    _emit(report, args.json)
    return _finish(EXIT[report["status"]], timed_out)


def _slug(job_or_record) -> str:
    check, target = job_or_record
    base = check if target is None else f"{check}-{target}"
    return re.sub(r"[^A-Za-z0-9._-]+", "_", base)


def cmd_report_all(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [Job(c, t) for c, t in SUITE]
    records, timed_out = run_jobs(jobs, args.timeout_s, args.threads)
    for r in records:
        rep = make_report(f"verify {r['check_name']}" + (f" {r['target']}" if r["target"] else ""),
                          [r["target"]] if r["target"] else [], [r])
        (out / f"{_slug((r['check_name'], r['target']))}.json").write_text(_dump(rep))
    summary = make_report("report-all", sorted({t for _, t in SUITE if t}), [
        {k: r[k] for k in ("check_name", "target", "status", "summary", "wall_time_ms")} for r in records
    ])
    summary["files"] = sorted(f"{_slug((r['check_name'], r['target']))}.json" for r in records)
    (out / "summary.json").write_text(_dump(summary))
    _emit(summary, args.json)
    return _finish(EXIT[summary["status"]], timed_out)


def _finish(code: int, timed_out: bool) -> int:
    if timed_out:
        # worker threads cannot be cancelled; leave without joining them
        sys.stdout.flush()
        sys.stderr.flush()
        os._exit(code)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlwe", description="Exact checks for orthogonal product-state sets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write a built-in state set in the text format")
    b.add_argument("set_name", help="g1..g4, tiles, shifts, strong:p,q,r, strong:a,b,c/d,e,f/g,h,i, strong7:p,q,r")
    b.add_argument("out_path", nargs="?", help="output file (default stdout)")
    b.set_defaults(func=cmd_build)

    def common(sp):
        sp.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
        sp.add_argument("--timeout-s", type=float, default=600.0)
        sp.add_argument("--threads", type=int, default=1)

    v = sub.add_parser("verify", help="run one check (or the whole suite with 'all')")
    v.add_argument("check", choices=CHECKS)
    v.add_argument("target", nargs="?", help="built-in set name")
    v.add_argument("--set", metavar="FILE", help="state-set file instead of a built-in name")
    v.add_argument("--protocol", metavar="FILE", help="protocol file for the protocol check")
    common(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report-all", help="run the full suite, one JSON file per check plus summary.json")
    r.add_argument("out_dir")
    common(r)
    r.set_defaults(func=cmd_report_all)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1 or getattr(args, "timeout_s", 1) <= 0:
        print("nlwe: --threads and --timeout-s must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nlwe: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
