"""Greenberg's sufficient criterion for mu_p = lambda_p = 0, plus Selmer-fact ingestion."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .arith import FactorizationError
from .curve_model import CurveModel
from .reduction import BadReduction, frobenius, local_data, rules_out_rational_5_torsion

log = logging.getLogger(__name__)

PROVEN = "ProvenVanishing"
FAILS = "FailsLocalCondition"
INCONCLUSIVE = "Inconclusive"

RANK_UNKNOWN = "unknown"
SHA_TRIVIAL, SHA_NONTRIVIAL, SHA_UNKNOWN = "trivial", "nontrivial", "unknown"


class ReferenceDataError(ValueError):
    pass


@dataclass(frozen=True)
class SelmerFact:
    rank_status: int | str = RANK_UNKNOWN  # a known rank r >= 0, or "unknown"
    sha5_status: str = SHA_UNKNOWN
    source: str = "absent"

    def __post_init__(self):
        if self.rank_status != RANK_UNKNOWN:
            if not isinstance(self.rank_status, int) or self.rank_status < 0:
                raise ValueError(f"rank must be a nonnegative integer, got {self.rank_status!r}")
        if self.sha5_status not in (SHA_TRIVIAL, SHA_NONTRIVIAL, SHA_UNKNOWN):
            raise ValueError(f"bad Sha status {self.sha5_status!r}")


ABSENT = SelmerFact()


@dataclass(frozen=True)
class Verdict:
    outcome: str
    reason: str = ""
    evidence: Mapping[str, object] = field(default_factory=dict)

    @property
    def proven(self) -> bool:
        return self.outcome == PROVEN


def decide(
    facts: SelmerFact,
    ordinary: bool | None,
    non_anomalous: bool | None,
    tamagawa_prime_to_p: bool | None,
    torsion: str,
) -> tuple[str, str]:
    """Combine the four conditions.  None means "could not be evaluated"."""
    failures = []
    if ordinary is False:
        failures.append("not good ordinary at p")
    if non_anomalous is False:
        failures.append("anomalous at p")
    if tamagawa_prime_to_p is False:
        failures.append("p divides a Tamagawa number")
    if failures:
        return FAILS, "; ".join(failures)
    missing = []
    if ordinary is None or non_anomalous is None or tamagawa_prime_to_p is None:
        missing.append("local data")
    if facts.rank_status == RANK_UNKNOWN:
        missing.append("rank unknown")
    elif facts.rank_status != 0:
        missing.append(f"rank {facts.rank_status} > 0")
    if facts.sha5_status == SHA_UNKNOWN:
        missing.append("Sha[p] unknown")
    elif facts.sha5_status == SHA_NONTRIVIAL:
        missing.append("Sha[p] nontrivial")
    if torsion != "yes":
        missing.append("E(Q)[p] not ruled out")
    if missing:
        return INCONCLUSIVE, "; ".join(missing)
    return PROVEN, "all conditions established"


def greenberg_check(c: CurveModel, facts: SelmerFact = ABSENT, p: int = 5,
                    torsion_budget: int = 200) -> Verdict:
    if p < 5:
        raise ValueError("the criterion is only implemented for p >= 5")
    evidence: dict[str, object] = {"p": p, "facts_source": facts.source}
    try:
        fr = frobenius(c, p)
    except BadReduction:
        ordinary = non_anom = False
        evidence["reduction_at_p"] = "bad"
    else:
        ordinary, non_anom = fr.ordinary, not fr.anomalous
        evidence.update(a_p=fr.a_p, n_p=fr.n_p)
    evidence["ordinary"] = ordinary
    evidence["non_anomalous"] = non_anom
    try:
        cs = {d.ell: d.c for d in local_data(c) if d.ell != p}
        tam_ok: bool | None = all(v % p for v in cs.values())
        evidence["tamagawa"] = cs
    except FactorizationError as exc:
        tam_ok = None
        evidence["tamagawa"] = f"factorization failed, cofactor {exc.cofactor}"
    evidence["tamagawa_prime_to_p"] = tam_ok
    torsion = rules_out_rational_5_torsion(c, torsion_budget) if p == 5 else _torsion_test(c, p, torsion_budget)
    evidence["torsion_ruled_out"] = torsion
    evidence["rank"] = facts.rank_status
    evidence["sha"] = facts.sha5_status
    outcome, reason = decide(facts, ordinary, non_anom, tam_ok, torsion)
    return Verdict(outcome, reason, evidence)


def _torsion_test(c: CurveModel, p: int, budget: int) -> str:
    from .arith import primes_up_to

    for ell in primes_up_to(budget):
        if ell in (2, p) or c.discriminant % ell == 0:
            continue
        if frobenius(c, ell).n_p % p:
            return "yes"
    return "inconclusive"


# --- reference files -------------------------------------------------------


def _parse_rank(text: str) -> int | str:
    text = text.strip()
    if text == "?":
        return RANK_UNKNOWN
    r = int(text)
    if r < 0:
        raise ValueError("negative rank")
    return r


def _parse_sha(text: str) -> str:
    return {"1": SHA_TRIVIAL, "0": SHA_NONTRIVIAL, "?": SHA_UNKNOWN}[text.strip()]


@dataclass
class IngestReport:
    facts: dict[tuple[int, int], SelmerFact]
    malformed: list[tuple[int, str]]


def ingest_reference_facts(path: str | Path) -> IngestReport:
    """Read `A,B,rank,sha5_trivial`; bad rows are reported with line numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReferenceDataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or [h.strip() for h in rows[0]] != ["A", "B", "rank", "sha5_trivial"]:
        raise ReferenceDataError(f"{path}: header must be A,B,rank,sha5_trivial")
    facts: dict[tuple[int, int], SelmerFact] = {}
    where: dict[tuple[int, int], int] = {}
    bad: list[tuple[int, str]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not x.strip() for x in row):
            continue
        try:
            if len(row) != 4:
                raise ValueError(f"expected 4 fields, got {len(row)}")
            key = (int(row[0]), int(row[1]))
            fact = SelmerFact(_parse_rank(row[2]), _parse_sha(row[3]), f"file:{Path(path).name}")
        except (ValueError, KeyError) as exc:
            bad.append((lineno, str(exc) or "unparseable field"))
            continue
        if key in facts and facts[key] != fact:
            raise ReferenceDataError(
                f"{path}: conflicting facts for {key} on lines {where[key]} and {lineno}"
            )
        facts.setdefault(key, fact)
        where.setdefault(key, lineno)
    for lineno, msg in bad:
        log.warning("%s:%d: %s", path, lineno, msg)
    return IngestReport(facts, bad)


@dataclass(frozen=True)
class ReferenceReduction:
    kodaira: str
    f: int
    c: int


def ingest_reference_reduction(path: str | Path) -> dict[tuple[int, int, int], ReferenceReduction]:
    """Read `A,B,ell,kodaira,conductor_exponent,tamagawa`."""
    try:
        fh = Path(path).open(encoding="utf-8", newline="")
    except OSError as exc:
        raise ReferenceDataError(f"cannot read {path}: {exc}") from exc
    out = {}
    with fh:
        reader = csv.DictReader(fh)
        need = {"A", "B", "ell", "kodaira", "conductor_exponent", "tamagawa"}
        if not reader.fieldnames or not need <= set(reader.fieldnames):
            raise ReferenceDataError(f"{path}: missing columns {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                key = (int(row["A"]), int(row["B"]), int(row["ell"]))
                out[key] = ReferenceReduction(
                    row["kodaira"].strip(), int(row["conductor_exponent"]), int(row["tamagawa"])
                )
            except (ValueError, TypeError) as exc:
                raise ReferenceDataError(f"{path}:{lineno}: {exc}") from exc
    return out


# --- optional remote source ------------------------------------------------


def _fact_from_payload(payload: Mapping) -> SelmerFact:
    rank = payload.get("rank")
    sha = payload.get("sha5_trivial", payload.get("sha"))
    rank_status: int | str = rank if isinstance(rank, int) and rank >= 0 else RANK_UNKNOWN
    if sha is True or sha == 1:
        sha_status = SHA_TRIVIAL
    elif sha is False or sha == 0:
        sha_status = SHA_NONTRIVIAL
    else:
        sha_status = SHA_UNKNOWN
    return SelmerFact(rank_status, sha_status, "remote")


def fetch_remote_facts(
    curves: Iterable[CurveModel],
    endpoint: str,
    cache_dir: str | Path | None = None,
    client=None,
    min_interval: float = 0.2,
) -> dict[tuple[int, int], SelmerFact]:
    """GET ``{endpoint}?A=..&B=..`` per curve, caching each raw body on disk.

    Any network or HTTP problem yields SelmerFact(unknown, unknown) for that
    curve; nothing here raises.
    """
    import httpx

    cache = Path(cache_dir or os.environ.get("IWASAWA_CENSUS_CACHE", ".iwasawa_cache"))
    cache.mkdir(parents=True, exist_ok=True)
    own = client is None
    client = client or httpx.Client(timeout=10.0)
    out: dict[tuple[int, int], SelmerFact] = {}
    last = 0.0
    try:
        for c in curves:
            key = (c.A, c.B)
            f = cache / f"{c.A}_{c.B}.json"
            body = None
            if f.exists():
                body = f.read_text(encoding="utf-8")
            else:
                wait = min_interval - (time.monotonic() - last)
                if wait > 0:
                    time.sleep(wait)
                last = time.monotonic()
                try:
                    resp = client.get(endpoint, params={"A": c.A, "B": c.B})
                    resp.raise_for_status()
                    body = resp.text
                    f.write_text(body, encoding="utf-8")
                except httpx.HTTPError as exc:
                    log.warning("remote facts for %s unavailable: %s", key, exc)
            if body is None:
                out[key] = SelmerFact(RANK_UNKNOWN, SHA_UNKNOWN, "remote")
                continue
            try:
                payload = json.loads(body)
                out[key] = _fact_from_payload(payload if isinstance(payload, dict) else {})
            except json.JSONDecodeError:
                log.warning("remote facts for %s: unparseable body", key)
                out[key] = SelmerFact(RANK_UNKNOWN, SHA_UNKNOWN, "remote")
    finally:
        if own:
            client.close()
    return out
