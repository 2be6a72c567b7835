"""Experiments over C(X): sharded execution, checkpoints, and report emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .arith import FactorizationError
from .constants import (
    DEFAULT_EULER_CUTOFF,
    constants_report,
    euler_product_ge7,
    predicted_count,
    zeta_10,
)
from .curve_model import (
    CurveModel,
    j_valuation,
    odd_part_of_naive_discriminant,
    trusted_curve,
    twist_by_minus_one,
)
from .enumeration import (
    HeightBound,
    RangeShard,
    brumer_ratio,
    iter_lattice_rows,
    iter_rows,
    shard_by_width,
)
from .intervals import EulerProductValue, power_enclosure
from .iwasawa_criterion import (
    ABSENT,
    SelmerFact,
    fetch_remote_facts,
    greenberg_check,
    ingest_reference_facts,
    ingest_reference_reduction,
)
from .local_conditions import (
    CongruenceFamily,
    family_E,
    family_from_selector,
    local_density,
    local_factor,
    pi_condition,
)
from .reduction import BadReduction, frobenius, local_data, tate_local

EXPERIMENTS = ("brumer", "density", "audit-E", "greenberg", "constants")
FORMATS = ("csv", "json")
DEFAULT_SHARDS = 16
DEFAULT_AUDIT_X = 10**13

RECORD_FIELDS = (
    "A",
    "B",
    "height",
    "delta",
    "in_family",
    "in_E",
    "bad_primes",
    "a5",
    "n5",
    "ordinary",
    "anomalous",
    "torsion",
    "verdict",
    "evidence",
)


class CensusError(Exception):
    """Configuration or IO problem; reported as a structured diagnostic."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind

    def as_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class Interrupted(RuntimeError):
    """Raised by the test hook that stops a run after some shards."""


@dataclass(frozen=True)
class CensusConfig:
    experiment: str
    height_bound: int = 10**6
    family: str = "all"
    jobs: int = 1
    output: str | None = None
    format: str = "csv"
    reference_facts: str | None = None
    reference_reduction: str | None = None
    euler_cutoff: int = DEFAULT_EULER_CUTOFF
    checkpoint_dir: str | None = None
    checkpoint_interval: int | None = None  # A-values per shard
    allow_network: bool = False
    grid: tuple[int, ...] | None = None
    endpoint: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise CensusError("config", f"unknown experiment {self.experiment!r}")
        if self.format not in FORMATS:
            raise CensusError("config", f"unknown format {self.format!r}")
        if int(self.height_bound) != self.height_bound or self.height_bound < 1:
            raise CensusError("config", "height bound must be an integer >= 1")
        if self.jobs < 1:
            raise CensusError("config", "jobs must be >= 1")
        if self.euler_cutoff < 7:
            raise CensusError("config", "euler cutoff must be >= 7")
        if self.checkpoint_interval is not None and self.checkpoint_interval < 1:
            raise CensusError("config", "checkpoint interval must be >= 1")
        for X in self.grid or ():
            if X < 1:
                raise CensusError("config", "grid values must be >= 1")

    @property
    def heights(self) -> tuple[int, ...]:
        return tuple(self.grid) if self.grid else (self.height_bound,)

    def fingerprint(self) -> str:
        """Hash of everything that affects the report (not jobs or output path)."""
        keep = asdict(self)
        for k in ("jobs", "output", "checkpoint_dir", "format"):
            keep.pop(k)
        return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class CensusRecord:
    A: int
    B: int
    height: int
    delta: int
    in_family: bool
    in_E: bool
    bad_primes: str
    a5: int | None
    n5: int | None
    ordinary: bool | None
    anomalous: bool | None
    torsion: str
    verdict: str
    evidence: str

    def row(self) -> list[str]:
        return [_cell(getattr(self, f)) for f in RECORD_FIELDS]


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, EulerProductValue):
        return x.format(12)
    return str(x)


@dataclass
class Report:
    fields: tuple[str, ...]
    rows: list[list[str]]
    summary: list[str] = field(default_factory=list)


# --- emission ----------------------------------------------------------------


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.fields)
    w.writerows(report.rows)
    return buf.getvalue()


_INT = re.compile(r"-?\d+\Z")


def _json_value(cell: str):
    if _INT.match(cell):
        return int(cell)
    if cell in ("true", "false"):
        return cell == "true"
    if cell == "":
        return None
    return cell


def render_json(report: Report) -> str:
    objs = [{k: _json_value(v) for k, v in zip(report.fields, row)} for row in report.rows]
    return json.dumps(objs, indent=1) + "\n"


def emit(report: Report, fmt: str, path: str | Path | None) -> str:
    """Write the report; partial files are removed if anything goes wrong."""
    text = render_csv(report) if fmt == "csv" else render_json(report)
    if path is None:
        sys.stdout.write(text)
        return text
    target = Path(path)
    tmp = target.with_name(target.name + ".partial")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, target)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise CensusError("io", f"cannot write {target}: {exc}") from exc
    return text


# --- shard tasks -----------------------------------------------------------


@dataclass(frozen=True)
class Task:
    index: int
    X: int
    A_lo: int
    A_hi: int

    @property
    def key(self) -> str:
        return f"{self.X}_{self.index}"


def plan(config: CensusConfig) -> list[Task]:
    """Shards depend only on X and the checkpoint interval, never on jobs."""
    tasks = []
    for X in config.heights:
        bound = HeightBound(X)
        width = config.checkpoint_interval or max(1, -(-(2 * bound.A_max + 1) // DEFAULT_SHARDS))
        for i, s in enumerate(shard_by_width(bound, width)):
            tasks.append(Task(len(tasks), X, s.A_lo, s.A_hi))
    return tasks


def _family(config: CensusConfig) -> CongruenceFamily:
    try:
        return family_from_selector(config.family)
    except (OSError, ValueError) as exc:
        raise CensusError("family", f"{config.family}: {exc}") from exc


def _vector_filter(family: CongruenceFamily) -> Callable | None:
    """Row filter for families with explicit conditions only."""
    conds = list(family.explicit.values())
    if not conds:
        return None

    def filt(A: int, B: np.ndarray) -> np.ndarray:
        ok = np.ones(B.shape, dtype=bool)
        for c in conds:
            if c.positive_A and A <= 0:
                return np.zeros(B.shape, dtype=bool)
            M = c.modulus
            ok &= np.asarray(c.predicate(np.int64(A % M), B % M), dtype=bool)
        return ok

    return filt


def _curves_in_task(family: CongruenceFamily, task: Task) -> Iterator[CurveModel]:
    """Members of the family in one A-strip, in (A, B) order."""
    bound = HeightBound(task.X)
    part = RangeShard(task.A_lo, task.A_hi, bound)
    if family.explicit:
        rows = iter_lattice_rows(family.lattice_classes, bound, family.requires_positive_A, part)
    else:
        rows = iter_rows(bound, part)
    for A, Bs in rows:
        for b in Bs.tolist():
            c = trusted_curve(A, b)
            if family.default_rule == "none" or family.contains(c):
                yield c


def _count_task(config: CensusConfig, task: Task) -> dict:
    bound = HeightBound(task.X)
    part = RangeShard(task.A_lo, task.A_hi, bound)
    total = sum(len(Bs) for _, Bs in iter_rows(bound, part))
    out = {"total": total}
    if config.experiment == "density":
        family = _family(config)
        if family.default_rule == "pi":
            out.update(_lattice_density_task(family, bound, part))
        else:
            filt = _vector_filter(family)
            out["members"] = total if filt is None else sum(
                len(Bs) for _, Bs in iter_rows(bound, part, filt)
            )
    return out


def _lattice_density_task(family: CongruenceFamily, bound: HeightBound, part: RangeShard) -> dict:
    """Counts inside the lattice of the explicit conditions (sieved for minimality)."""
    skip = set(family.explicit)
    pi3 = pi_condition(3)
    lattice = pi3_ok = members = 0
    for A, Bs in iter_lattice_rows(family.lattice_classes, bound, family.requires_positive_A, part):
        for b in Bs.tolist():
            lattice += 1
            if 3 not in skip and not pi3.holds(A, b):
                continue
            pi3_ok += 1
            if family.contains(trusted_curve(A, b)):
                members += 1
    return {"lattice": lattice, "pi3": pi3_ok, "members": members}


def _bad_prime_summary(c: CurveModel) -> str:
    return ";".join(f"{d.ell}:{d.kodaira}:{d.f}:{d.c}" for d in local_data(c))


def audit_E_member(c: CurveModel, family: CongruenceFamily | None = None) -> list[str]:
    """Local properties every member of E must have; returns the failed ones."""
    family = family or family_E()
    failed = []
    if tate_local(c, 2).type != "additive":
        failed.append("additive at 2")
    if j_valuation(c, 2) != 0:
        failed.append("v2(j) = 0")
    d, _ = odd_part_of_naive_discriminant(c)
    if not (d > 0 and d % 4 == 1):
        failed.append("odd part of discriminant > 0 and = 1 mod 4")
    try:
        fr = frobenius(c, 5)
        if fr.a_p != -3 or fr.n_p != 9:
            failed.append("a5 = -3, n5 = 9")
        if not fr.ordinary or fr.anomalous:
            failed.append("ordinary, non-anomalous at 5")
    except BadReduction:
        failed.append("good at 5")
    prod = 1
    for data in local_data(c):
        prod *= data.c
    if prod % 5 == 0:
        failed.append("5 does not divide the Tamagawa product")
    if not family.contains(twist_by_minus_one(c)):
        failed.append("twist by -1 stays in E")
    return failed


def _record(c: CurveModel, family: CongruenceFamily, fact: SelmerFact, audit: bool) -> CensusRecord:
    E = family_E()
    in_E = E.contains(c) if family.name != "E" else True
    try:
        bad = _bad_prime_summary(c)
    except FactorizationError as exc:
        bad = f"unfactored:{exc.cofactor}"
    try:
        fr = frobenius(c, 5)
        a5, n5, ordn, anom = fr.a_p, fr.n_p, fr.ordinary, fr.anomalous
    except BadReduction:
        a5 = n5 = ordn = anom = None
    verdict = greenberg_check(c, fact)
    evidence = verdict.reason
    if audit:
        failed = audit_E_member(c, E)
        evidence = ("audit ok" if not failed else "audit FAILED: " + ", ".join(failed)) + "; " + evidence
    return CensusRecord(
        A=c.A,
        B=c.B,
        height=c.height,
        delta=c.delta,
        in_family=True,
        in_E=in_E,
        bad_primes=bad,
        a5=a5,
        n5=n5,
        ordinary=ordn,
        anomalous=anom,
        torsion=str(verdict.evidence.get("torsion_ruled_out", "")),
        verdict=verdict.outcome,
        evidence=evidence,
    )


def _records_task(config: CensusConfig, task: Task, facts: dict) -> dict:
    family = family_E() if config.experiment == "audit-E" else _family(config)
    rows = []
    for c in _curves_in_task(family, task):
        fact = facts.get((c.A, c.B), ABSENT)
        rows.append(_record(c, family, fact, config.experiment == "audit-E").row())
    return {"rows": rows}


def run_task(config: CensusConfig, task: Task, facts: dict | None = None) -> dict:
    if config.experiment in ("brumer", "density"):
        return _count_task(config, task)
    return _records_task(config, task, facts or {})


def _run_task_star(args):
    return run_task(*args)


# --- checkpoints -----------------------------------------------------------


class Checkpoint:
    def __init__(self, directory: str | Path | None, fingerprint: str):
        self.dir = Path(directory) if directory else None
        self.fingerprint = fingerprint
        self.done: dict[str, dict] = {}
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        state = self.dir / "state.json"
        if state.exists():
            meta = json.loads(state.read_text(encoding="utf-8"))
            if meta.get("fingerprint") != fingerprint:
                raise CensusError(
                    "checkpoint", f"{self.dir} belongs to a different configuration"
                )
            for key in meta.get("completed", []):
                frag = self.dir / f"shard_{key}.json"
                if frag.exists():
                    self.done[key] = json.loads(frag.read_text(encoding="utf-8"))

    def save(self, key: str, fragment: dict) -> None:
        self.done[key] = fragment
        if self.dir is None:
            return
        frag = self.dir / f"shard_{key}.json"
        tmp = frag.with_suffix(".tmp")
        tmp.write_text(json.dumps(fragment), encoding="utf-8")
        os.replace(tmp, frag)
        state = {"fingerprint": self.fingerprint, "completed": sorted(self.done),
                 "last": key}
        tmp = self.dir / "state.tmp"
        tmp.write_text(json.dumps(state, indent=1), encoding="utf-8")
        os.replace(tmp, self.dir / "state.json")


# --- reports -----------------------------------------------------------------


def _interval(x: EulerProductValue, digits: int = 12) -> str:
    return x.format(digits)


def _brumer_report(config: CensusConfig, frags: dict[int, list[dict]]) -> Report:
    z = zeta_10(Fraction(1, 10**20))
    rows = []
    for X in config.heights:
        n = sum(f["total"] for f in frags[X])
        pred = 4 * power_enclosure(X, 5, 6) / z
        rows.append([str(X), str(n), _interval(pred, 6), _interval(brumer_ratio(n, X, z))])
    summary = [f"#C({r[0]}) = {r[1]}, ratio {r[3]}" for r in rows]
    return Report(("X", "count", "predicted", "ratio"), rows, summary)


def _density_report(config: CensusConfig, frags: dict[int, list[dict]]) -> Report:
    family = _family(config)
    if family.default_rule == "pi":
        return _lattice_density_report(config, family, frags)
    dens = Fraction(1)
    for c in family.explicit.values():
        dens *= local_density(c)
    rows = []
    for X in config.heights:
        total = sum(f["total"] for f in frags[X])
        members = sum(f["members"] for f in frags[X])
        pred = predicted_count(family, X, config.euler_cutoff)
        share = Fraction(members, total) if total else Fraction(0)
        rows.append([
            str(X), family.name, str(members), str(total), _interval(pred.count, 6),
            _interval(members / pred.count) if members else "0",
            f"{share.numerator}/{share.denominator}", str(dens),
            _interval(EulerProductValue.exact(share / dens), 12) if dens else "",
        ])
    fields = ("X", "family", "count", "total", "predicted", "ratio", "share",
              "density", "share_over_density")
    summary = [f"X={r[0]} {r[1]}: share/density {r[8]}" for r in rows]
    return Report(fields, rows, summary)


def _lattice_density_report(config, family: CongruenceFamily, frags) -> Report:
    z = zeta_10(Fraction(1, 10**20))
    euler = euler_product_ge7(config.euler_cutoff)
    # prod over l >= 7 of d(Pi_l) = zeta(10) prod_{l<7}(1 - l^-10) * euler
    small = Fraction(1)
    for ell in (2, 3, 5):
        small *= 1 - Fraction(1, ell**10)
    pred_ge7 = z * small * euler
    pi3 = local_density(pi_condition(3)) if 3 not in family.explicit else Fraction(1)
    rows = []
    for X in config.heights:
        lat = sum(f["lattice"] for f in frags[X])
        p3 = sum(f["pi3"] for f in frags[X])
        mem = sum(f["members"] for f in frags[X])
        pred = predicted_count(family, X, config.euler_cutoff)
        cond = Fraction(mem, p3) if p3 else Fraction(0)
        share3 = Fraction(p3, lat) if lat else Fraction(0)
        rows.append([
            str(X), family.name, str(lat), str(p3), str(mem),
            f"{share3.numerator}/{share3.denominator}", str(pi3),
            f"{cond.numerator}/{cond.denominator}", _interval(pred_ge7),
            _interval(cond / pred_ge7) if p3 else "",
            _interval(pred.count, 6), _interval(mem / pred.count) if mem else "0",
        ])
    fields = ("X", "family", "lattice", "pi3", "members", "pi3_share", "pi3_density",
              "conditional_ge7", "predicted_ge7", "ratio_ge7", "predicted", "ratio")
    summary = [f"X={r[0]} {r[1]}: {r[4]} members, ratio_ge7 {r[9]}" for r in rows]
    return Report(fields, rows, summary)


def _constants_report(config: CensusConfig) -> Report:
    rows = [list(r) for r in constants_report(config.euler_cutoff)]
    return Report(("quantity", "value", "kind"), rows, [f"{r[0]}: {r[1]}" for r in rows])


def _records_report(config: CensusConfig, frags: dict[int, list[dict]]) -> Report:
    rows = [row for X in config.heights for f in frags[X] for row in f["rows"]]
    verdicts: dict[str, int] = {}
    for row in rows:
        verdicts[row[12]] = verdicts.get(row[12], 0) + 1
    summary = [f"{len(rows)} curves; verdicts {dict(sorted(verdicts.items()))}"]
    if config.experiment == "audit-E":
        bad = [r for r in rows if "audit FAILED" in r[13]]
        summary.append(f"audit-E: {len(rows) - len(bad)} of {len(rows)} members pass all properties")
        for r in bad:
            summary.append(f"  violation: {','.join(r)}")
    return Report(RECORD_FIELDS, rows, summary)


def _load_facts(config: CensusConfig, tasks: Sequence[Task]) -> dict:
    facts: dict = {}
    if config.reference_facts:
        try:
            facts.update(ingest_reference_facts(config.reference_facts).facts)
        except ValueError as exc:
            raise CensusError("reference-facts", str(exc)) from exc
    if config.allow_network:
        endpoint = config.endpoint or os.environ.get("IWASAWA_CENSUS_ENDPOINT")
        if endpoint:
            family = family_E() if config.experiment == "audit-E" else _family(config)
            curves = [c for t in tasks for c in _curves_in_task(family, t)
                      if (c.A, c.B) not in facts]
            facts.update(fetch_remote_facts(curves, endpoint))
    return facts


def check_reference_reduction(path: str) -> list[str]:
    """Mismatches between tate_local and a reference reduction file."""
    ref = ingest_reference_reduction(path)
    bad = []
    for (A, B, ell), want in sorted(ref.items()):
        got = tate_local(trusted_curve(A, B), ell)
        if (got.kodaira, got.f, got.c) != (want.kodaira, want.f, want.c):
            bad.append(f"{A},{B} at {ell}: got {got.kodaira},{got.f},{got.c}, "
                       f"expected {want.kodaira},{want.f},{want.c}")
    return bad


def build_report(config: CensusConfig, stop_after: int | None = None) -> Report:
    if config.experiment == "constants":
        return _constants_report(config)
    if config.experiment == "density":
        _family(config)  # validate early
    tasks = plan(config)
    ckpt = Checkpoint(config.checkpoint_dir, config.fingerprint())
    facts = _load_facts(config, tasks) if config.experiment in ("greenberg", "audit-E") else {}
    todo = [t for t in tasks if t.key not in ckpt.done]
    finished = 0

    def record(task: Task, frag: dict) -> None:
        nonlocal finished
        ckpt.save(task.key, frag)
        finished += 1
        if stop_after is not None and finished >= stop_after:
            raise Interrupted(f"stopped after {finished} shards")

    if config.jobs == 1 or len(todo) <= 1:
        for t in todo:
            record(t, run_task(config, t, facts))
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futs = {pool.submit(_run_task_star, (config, t, facts)): t for t in todo}
            try:
                for fut in as_completed(futs):
                    record(futs[fut], fut.result())
            except BaseException:
                for f in futs:
                    f.cancel()
                raise
    frags: dict[int, list[dict]] = {X: [] for X in config.heights}
    for t in tasks:
        frags[t.X].append(ckpt.done[t.key])
    if config.experiment == "brumer":
        return _brumer_report(config, frags)
    if config.experiment == "density":
        return _density_report(config, frags)
    return _records_report(config, frags)


def run(config: CensusConfig, stop_after: int | None = None, log=sys.stderr) -> int:
    report = build_report(config, stop_after)
    if config.reference_reduction:
        try:
            mism = check_reference_reduction(config.reference_reduction)
        except ValueError as exc:
            raise CensusError("reference-reduction", str(exc)) from exc
        report.summary.append(f"reference reduction cross-check: {len(mism)} mismatches")
        report.summary.extend("  " + m for m in mism)
    emit(report, config.format, config.output)
    if log is not None:
        for line in report.summary:
            print(line, file=log)
    return 0
