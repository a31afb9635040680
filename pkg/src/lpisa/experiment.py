"""Batches of instanton searches, deduplication, bar graphs and a brute-force oracle.

A batch is a pure function of (code, k0, trials, master_seed): every trial
draws from its own keyed stream, trial results are merged in trial order, and
the report is rebuilt from the per-trial summaries. Any prefix of a batch is
therefore the batch with fewer trials (:meth:`BatchReport.prefix`).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .code_model import TannerCode
from .isa import InsufficientNoise, TheoremViolation, isa_run, verify_instanton
from .lp_decoder import FORMULATIONS, FlipSupport, LpDecoder, OutcomeKind, PseudoCodeword
from .lp_solver import LpError
from .pcw_analysis import bsc_weight, check_weight_bounds, frac_weight
from .rng import TrialRng, stream

SCHEMA_VERSION = 1
ORACLE_CAP = 2_000_000

TALLY_KEYS = (
    "instantons",
    "insufficient_noise",
    "solver_errors",
    "theorem_violations",
    "steps_over_bound",
    "weight_not_decreasing",
    "pcws_checked",
    "weight_bound_violations",
    "dfrac_bound_violations",
    "verify_failures",
)


@dataclass(frozen=True)
class TrialSummary:
    """Everything a batch keeps about one trial."""

    trial: int
    status: str  # "instanton", "insufficient_noise", "solver_error", "theorem_violation"
    support: tuple[int, ...] = ()
    pcw_weight: int | None = None
    frac_weight: Fraction | None = None
    steps_used: int = 0
    weights: tuple[int, ...] = ()
    pcws_checked: int = 0
    weight_bound_violations: int = 0
    dfrac_bound_violations: int = 0
    verified: bool | None = None
    error: str = ""


@dataclass(frozen=True)
class Hit:
    support: FlipSupport
    trial: int
    pcw_weight: int
    frac_weight: Fraction


@dataclass(frozen=True)
class InstantonRecord:
    support: FlipSupport
    size: int
    pcw_weight: int
    frac_weight: Fraction
    first_seen_trial: int
    hit_count: int

    def __post_init__(self) -> None:
        if self.size != len(self.support):
            raise ValueError("record size does not match its support")


@dataclass(frozen=True)
class BatchReport:
    fingerprint: str
    n: int
    k0: int
    trials: int
    master_seed: int
    formulation: str
    frequency_bars: dict[int, int]
    unique_bars: dict[int, int]
    records: tuple[InstantonRecord, ...]
    tallies: dict[str, int]
    summaries: tuple[TrialSummary, ...] = field(repr=False, default=())

    def __post_init__(self) -> None:
        if sum(self.frequency_bars.values()) != self.trials:
            raise ValueError("frequency bars do not add up to the trial count")
        for s, u in self.unique_bars.items():
            if u != sum(1 for r in self.records if r.size == s) or u > self.frequency_bars.get(s, 0):
                raise ValueError(f"unique bar at size {s} is inconsistent")

    def prefix(self, trials: int) -> BatchReport:
        """The report of the first ``trials`` trials of this batch."""
        if not 0 <= trials <= self.trials:
            raise ValueError("prefix longer than the batch")
        return summarize(self.fingerprint, self.n, self.k0, self.master_seed, self.formulation,
                         self.summaries[:trials])

    @property
    def min_size(self) -> int | None:
        return min((r.size for r in self.records), default=None)

    @property
    def min_pcw_weight(self) -> int | None:
        return min((r.pcw_weight for r in self.records), default=None)


def dedup(hits: Iterable[Hit]) -> list[InstantonRecord]:
    """Group hits by support; sorted by size, then lexicographic support."""
    groups: dict[tuple[int, ...], list[Hit]] = {}
    for h in hits:
        groups.setdefault(h.support.support, []).append(h)
    out = []
    for key in sorted(groups, key=lambda s: (len(s), s)):
        hs = groups[key]
        first = min(hs, key=lambda h: h.trial)
        out.append(InstantonRecord(first.support, len(key), first.pcw_weight, first.frac_weight,
                                   first.trial, len(hs)))
    return out


def summarize(fingerprint: str, n: int, k0: int, master_seed: int, formulation: str,
              summaries: Sequence[TrialSummary]) -> BatchReport:
    freq: Counter[int] = Counter()
    tallies = dict.fromkeys(TALLY_KEYS, 0)
    hits = []
    for s in summaries:
        if s.status == "instanton":
            size = len(s.support)
            freq[size] += 1
            tallies["instantons"] += 1
            hits.append(Hit(FlipSupport(n, s.support), s.trial, s.pcw_weight, s.frac_weight))
            if s.steps_used > 2 * k0:
                tallies["steps_over_bound"] += 1
            if any(a <= b for a, b in zip(s.weights, s.weights[1:])):
                tallies["weight_not_decreasing"] += 1
            if s.verified is False:
                tallies["verify_failures"] += 1
        elif s.status == "insufficient_noise":
            freq[0] += 1
            tallies["insufficient_noise"] += 1
        else:
            # failed trials land in the 0 bin too so the bars still sum to the trial count
            freq[0] += 1
            tallies["solver_errors" if s.status == "solver_error" else "theorem_violations"] += 1
        tallies["pcws_checked"] += s.pcws_checked
        tallies["weight_bound_violations"] += s.weight_bound_violations
        tallies["dfrac_bound_violations"] += s.dfrac_bound_violations
    records = tuple(dedup(hits))
    unique = Counter(r.size for r in records)
    freq.setdefault(0, 0)
    return BatchReport(fingerprint, n, k0, len(summaries), master_seed, formulation,
                       dict(sorted(freq.items())), dict(sorted(unique.items())), records, tallies,
                       tuple(summaries))


def initiation(n: int, k0: int, rng: TrialRng) -> FlipSupport:
    return FlipSupport(n, tuple(rng.step(0).choice(n, size=k0, replace=False)))


# per-process state for batch workers
_STATE: dict = {}


def _init_worker(code: TannerCode, formulation: str, verify_formulation: str | None,
                 d_frac: Fraction | None) -> None:
    _STATE.clear()
    _STATE.update(code=code, decoder=LpDecoder(code, formulation), d_frac=d_frac,
                  verifier=LpDecoder(code, verify_formulation) if verify_formulation else None,
                  verified={})


def _harvest(result) -> list[PseudoCodeword]:
    out = [result.initial_outcome.pcw]
    for st in result.trace:
        out.append(st.median_outcome.pcw)
        out += [o.pcw for _, o in st.subset_outcomes if o.pcw is not None]
    return out


def _run_trial(args: tuple[int, int, int]) -> TrialSummary:
    k0, master_seed, t = args
    code, dec = _STATE["code"], _STATE["decoder"]
    rng = TrialRng(master_seed, t)
    start = initiation(code.n, k0, rng)
    try:
        res = isa_run(code, start, rng, dec)
    except InsufficientNoise:
        return TrialSummary(t, "insufficient_noise")
    except TheoremViolation as exc:
        return TrialSummary(t, "theorem_violation", error=str(exc))
    except (LpError, ValueError, ArithmeticError) as exc:
        return TrialSummary(t, "solver_error", error=f"{type(exc).__name__}: {exc}")

    pcws = _harvest(res)
    bad = sum(not check_weight_bounds(p).ok for p in pcws)
    d_frac = _STATE["d_frac"]
    bad_d = 0 if d_frac is None else sum(frac_weight(p) < d_frac for p in pcws)
    verified = None
    if _STATE["verifier"] is not None:
        key = res.instanton.support
        if key not in _STATE["verified"]:
            _STATE["verified"][key] = verify_instanton(code, res.instanton, _STATE["verifier"]).ok
        verified = _STATE["verified"][key]
    return TrialSummary(t, "instanton", res.instanton.support, res.final_weight,
                        frac_weight(res.final_pcw), res.steps_used, tuple(res.weights), len(pcws),
                        bad, bad_d, verified)


def run_batch(code: TannerCode, k0: int, trials: int, master_seed: int, workers: int = 1,
              formulation: str = "full", verify_formulation: str | None = "projected",
              d_frac: Fraction | None = None, progress=None) -> BatchReport:
    """Run ``trials`` searches from uniform ``k0``-flip initiations.

    Each halt is re-checked with a separate decoder (``verify_formulation``;
    None skips the check). With ``d_frac`` given, every harvested
    pseudo-codeword is also checked against it. ``progress``, if given, is
    called with the number of finished trials.
    """
    if not 1 <= k0 <= code.n:
        raise ValueError(f"k0 must lie in [1, {code.n}]")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}")
    jobs = [(k0, master_seed, t) for t in range(trials)]
    init = (code, formulation, verify_formulation, d_frac)
    summaries: list[TrialSummary] = []
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=init) as ex:
            for s in ex.map(_run_trial, jobs, chunksize=max(1, min(16, trials // (4 * workers)))):
                summaries.append(s)
                if progress:
                    progress(len(summaries))
    else:
        saved = dict(_STATE)
        _init_worker(*init)
        try:
            for job in jobs:
                summaries.append(_run_trial(job))
                if progress:
                    progress(len(summaries))
        finally:
            _STATE.clear()
            _STATE.update(saved)
    return summarize(code.fingerprint(), code.n, k0, master_seed, formulation, summaries)


# audits


@dataclass(frozen=True)
class SupersetAudit:
    sampled: int
    supersets_decoded: int
    superset_failures: int  # supersets that decoded to all-zero; 0 expected
    offenders: tuple[tuple[int, ...], ...]


def superset_audit(code: TannerCode, supports: Sequence[FlipSupport], samples: int, seed: int,
                   extra: int = 1, decoder: LpDecoder | None = None) -> SupersetAudit:
    """Decode a random strict superset of up to ``samples`` instantons; each must fail."""
    dec = decoder or LpDecoder(code)
    gen = stream(seed, 0)
    pool = list(supports)
    if len(pool) > samples:
        pool = [pool[i] for i in sorted(gen.choice(len(pool), samples, replace=False))]
    offenders = []
    for s in pool:
        rest = np.setdiff1d(np.arange(code.n), s.support)
        add = gen.choice(rest, size=min(extra, len(rest)), replace=False)
        sup = FlipSupport(code.n, s.support + tuple(int(a) for a in add))
        if not dec.decode(sup).is_failure:
            offenders.append(sup.support)
    return SupersetAudit(len(pool), len(pool), len(offenders), tuple(offenders))


class OracleCapExceeded(ValueError):
    pass


def brute_force_instantons(code: TannerCode, max_size: int, cap: int = ORACLE_CAP,
                           decoder: LpDecoder | None = None) -> set[FlipSupport]:
    """Minimal failing supports of size <= max_size, by decoding every support.

    A support is kept when it fails and none of its proper subsets failed.
    Failure is not assumed monotone: every support is decoded.
    """
    if max_size < 0:
        raise ValueError("max_size must be non-negative")
    total = sum(math.comb(code.n, s) for s in range(1, max_size + 1))
    if total > cap:
        raise OracleCapExceeded(f"{total} decodes exceed the cap of {cap}")
    dec = decoder or LpDecoder(code)
    failing: set[tuple[int, ...]] = set()
    out = set()
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(range(code.n), size):
            if not dec.decode(FlipSupport(code.n, combo)).is_failure:
                continue
            failing.add(combo)
            proper = (c for k in range(1, size) for c in itertools.combinations(combo, k))
            if not any(c in failing for c in proper):
                out.add(FlipSupport(code.n, combo))
    return out


# persistence


def _frac(v: Fraction | None) -> str | None:
    return None if v is None else str(v)


def _unfrac(v: str | None) -> Fraction | None:
    return None if v is None else Fraction(v)


def report_to_dict(report: BatchReport, include_trials: bool = True) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "code_fingerprint": report.fingerprint,
        "n": report.n,
        "k0": report.k0,
        "trials": report.trials,
        "master_seed": report.master_seed,
        "formulation": report.formulation,
        "frequency_bars": {str(k): v for k, v in report.frequency_bars.items()},
        "unique_bars": {str(k): v for k, v in report.unique_bars.items()},
        "tallies": dict(report.tallies),
        "records": [
            {
                "support": [i + 1 for i in r.support.support],
                "size": r.size,
                "pcw_weight": r.pcw_weight,
                "frac_weight": str(r.frac_weight),
                "first_seen_trial": r.first_seen_trial,
                "hit_count": r.hit_count,
            }
            for r in report.records
        ],
    }
    if include_trials:
        d["trials_detail"] = [
            {
                "trial": s.trial,
                "status": s.status,
                "support": [i + 1 for i in s.support],
                "pcw_weight": s.pcw_weight,
                "frac_weight": _frac(s.frac_weight),
                "steps_used": s.steps_used,
                "weights": list(s.weights),
                "pcws_checked": s.pcws_checked,
                "weight_bound_violations": s.weight_bound_violations,
                "dfrac_bound_violations": s.dfrac_bound_violations,
                "verified": s.verified,
                "error": s.error,
            }
            for s in report.summaries
        ]
    return d


def report_from_dict(d: dict) -> BatchReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
    n = d["n"]
    records = tuple(
        InstantonRecord(FlipSupport.from_one_based(n, r["support"]), r["size"], r["pcw_weight"],
                        Fraction(r["frac_weight"]), r["first_seen_trial"], r["hit_count"])
        for r in d["records"]
    )
    summaries = tuple(
        TrialSummary(s["trial"], s["status"], tuple(i - 1 for i in s["support"]), s["pcw_weight"],
                     _unfrac(s["frac_weight"]), s["steps_used"], tuple(s["weights"]), s["pcws_checked"],
                     s["weight_bound_violations"], s["dfrac_bound_violations"], s["verified"], s["error"])
        for s in d.get("trials_detail", [])
    )
    return BatchReport(d["code_fingerprint"], n, d["k0"], d["trials"], d["master_seed"], d["formulation"],
                       {int(k): v for k, v in d["frequency_bars"].items()},
                       {int(k): v for k, v in d["unique_bars"].items()}, records, dict(d["tallies"]),
                       summaries)


def bars_csv(report: BatchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "frequency_count", "unique_count"])
    for size in sorted(set(report.frequency_bars) | set(report.unique_bars)):
        w.writerow([size, report.frequency_bars.get(size, 0), report.unique_bars.get(size, 0)])
    return buf.getvalue()


def export_report(report: BatchReport, path: str | Path, fmt: str | None = None,
                  include_trials: bool = True) -> Path:
    """Write ``report`` as JSON or as the CSV bar table (format from the suffix by default)."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "json":
        text = json.dumps(report_to_dict(report, include_trials), indent=1, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = bars_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def import_report(path: str | Path) -> BatchReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def final_weight_of(code: TannerCode, support: FlipSupport, decoder: LpDecoder | None = None) -> tuple[int, Fraction]:
    """BSC and fractional weight of the LP output for ``support`` (must fail)."""
    out = (decoder or LpDecoder(code)).decode(support)
    if out.kind is OutcomeKind.ALL_ZERO:
        raise ValueError("support decodes to the all-zero codeword")
    return bsc_weight(out.pcw).w_bsc, frac_weight(out.pcw)
