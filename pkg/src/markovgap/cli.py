"""Batch front end: JSON configs in, CSV/JSON report rows out.

Config schema (JSON object)::

    {
      "seed": 20240607,                 # required when gap, lemmas or sigma run
      "p_grid": [1.5, 2, 3, 4],
      "tasks": ["validate", "gap", "bounds", "lemmas", "sigma"],
      "restarts": 20, "max_iters": 5000, "tol": 1e-10,
      "channels": [{"id": "dep", "kind": "depolarizing", "n": 2, "lambda": 0.5}],
      "bounds": {"c2": [0.5, 0.9]},
      "lemmas": {"instances": 200, "n": 2},
      "sigma": [{"id": "rot45", "algebra": {"matrix": 2},
                 "A": "diagonal", "B": "rotated-diagonal(45)"}],
      "output": "report.csv"
    }

A single ``"channel"`` object may replace ``"channels"``. Channel and
matrix encodings follow :func:`markovgap.channels.build_channel` and
:mod:`markovgap.io`.

Report columns, in order: ``task, channel_id, item, p, c2_exact, cp_lower,
cp_upper, upper_source, iterations, converged, margin, value, pass, reason``.
Numbers are written with 17 significant digits, missing values as empty
fields, booleans as ``true``/``false``, lines end with ``\\n``.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import numbers
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .algebra import schatten_norm
from .bounds import (
    asymptotic_slope,
    check_ando,
    check_mazur_holder,
    check_pbig,
    check_psmall,
    check_pto2,
    forward_bound,
)
from .channels import apply, build_channel
from .ensembles import random_channel, random_positive, random_element
from .algebra import matrix_algebra
from .exceptions import ConfigError
from .gap import gap_l2, gap_lp
from .sigma import SigmaInstance, corollary_sweep
from .structure import build_dilation, subalgebra_from_spec, verify_factorization

COLUMNS = ("task", "channel_id", "item", "p", "c2_exact", "cp_lower", "cp_upper", "upper_source",
           "iterations", "converged", "margin", "value", "pass", "reason")
TASKS = ("validate", "gap", "bounds", "lemmas", "sigma")
STOCHASTIC_TASKS = frozenset({"gap", "lemmas", "sigma"})
BRACKET_SLACK = 1e-7
RATIO_CAP = 1e3
DEFAULT_P_GRID = (1.5, 2.0, 3.0, 4.0)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass
class ChannelItem:
    id: str
    spec: dict
    channel: object


@dataclass
class SigmaItem:
    id: str
    A: object
    B: object


@dataclass
class ExperimentConfig:
    seed: int | None
    p_grid: tuple
    tasks: tuple
    restarts: int = 20
    max_iters: int = 5000
    tol: float = 1e-10
    channels: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    bounds_c2: tuple = ()
    lemma_instances: int = 200
    lemma_n: int = 2
    output: str | None = None
    raw: dict = field(default_factory=dict, repr=False)


@dataclass
class ReportRow:
    task: str
    channel_id: str
    item: str = ""
    p: float | None = None
    c2_exact: float | None = None
    cp_lower: float | None = None
    cp_upper: float | None = None
    upper_source: str | None = None
    iterations: int | None = None
    converged: bool | None = None
    margin: float | None = None
    value: float | None = None
    passed: bool = True
    reason: str = ""
    witness: object = field(default=None, repr=False)

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in COLUMNS if c != "pass"}
        d["pass"] = self.passed
        return {c: d[c] for c in COLUMNS}


# ---------------------------------------------------------------------------
# config parsing


def _is_real(v) -> bool:
    return isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_config(text) -> ExperimentConfig:
    """Validate a JSON config document (text or already-decoded object).

    Raises
    ------
    ConfigError
        With every schema problem found, each tagged by its path.
    """
    if isinstance(text, (str, bytes)):
        try:
            raw = json.loads(text)
        except (ValueError, RecursionError) as exc:
            raise ConfigError([("$", f"invalid JSON: {exc}")]) from None
    else:
        raw = text
    if not isinstance(raw, dict):
        raise ConfigError([("$", "config must be a JSON object")])
    errors = []

    tasks = raw.get("tasks", ["validate", "gap", "bounds"])
    if not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks):
        errors.append(("tasks", "must be a list of task names"))
        tasks = []
    for i, t in enumerate(tasks):
        if t not in TASKS:
            errors.append((f"tasks[{i}]", f"unknown task {t!r}; expected one of {', '.join(TASKS)}"))
    tasks = tuple(t for t in TASKS if t in tasks)

    seed = raw.get("seed")
    if seed is None:
        if STOCHASTIC_TASKS & set(tasks):
            errors.append(("seed", "a seed is required when gap, lemmas or sigma tasks run"))
    elif not _is_int(seed) or not 0 <= seed < 2**64:
        errors.append(("seed", f"must be a 64-bit non-negative integer, got {seed!r}"))
        seed = None

    p_grid = raw.get("p_grid", list(DEFAULT_P_GRID))
    if not isinstance(p_grid, list) or not p_grid:
        errors.append(("p_grid", "must be a non-empty list of numbers"))
        p_grid = []
    clean = []
    for i, p in enumerate(p_grid):
        if not (_is_real(p) or p in (math.inf,)) or isinstance(p, bool):
            errors.append((f"p_grid[{i}]", f"not a number: {p!r}"))
        elif not 1 < p < math.inf:
            if {"gap", "sigma", "lemmas"} & set(tasks):
                errors.append((f"p_grid[{i}]", f"p={p} outside (1, inf); the endpoints 1 and inf are excluded"))
        else:
            clean.append(float(p))
    p_grid = tuple(clean)

    def positive_int(key, default):
        v = raw.get(key, default)
        if not _is_int(v) or v < 1:
            errors.append((key, f"must be a positive integer, got {v!r}"))
            return default
        return v

    restarts = positive_int("restarts", 20)
    max_iters = positive_int("max_iters", 5000)
    tol = raw.get("tol", 1e-10)
    if not _is_real(tol) or tol <= 0:
        errors.append(("tol", f"must be a positive number, got {tol!r}"))
        tol = 1e-10

    channels = _parse_channels(raw, errors)
    sigma = _parse_sigma(raw.get("sigma", []), errors)

    bounds = raw.get("bounds", {})
    bounds_c2 = ()
    if not isinstance(bounds, dict):
        errors.append(("bounds", "must be an object"))
    else:
        c2s = bounds.get("c2", [])
        if not isinstance(c2s, list) or not all(_is_real(c) and 0 <= c < 1 for c in c2s):
            errors.append(("bounds.c2", "must be a list of numbers in [0, 1)"))
        else:
            bounds_c2 = tuple(float(c) for c in c2s)

    lemmas = raw.get("lemmas", {})
    instances, lemma_n = 200, 2
    if not isinstance(lemmas, dict):
        errors.append(("lemmas", "must be an object"))
    else:
        instances = lemmas.get("instances", 200)
        lemma_n = lemmas.get("n", 2)
        if not _is_int(instances) or instances < 1:
            errors.append(("lemmas.instances", f"must be a positive integer, got {instances!r}"))
            instances = 200
        if not _is_int(lemma_n) or not 1 <= lemma_n <= 8:
            errors.append(("lemmas.n", f"must be an integer in [1, 8], got {lemma_n!r}"))
            lemma_n = 2

    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        errors.append(("output", "must be a path string"))
        output = None

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(seed, p_grid, tasks, restarts, max_iters, float(tol), channels, sigma,
                            bounds_c2, instances, lemma_n, output, raw)


def _parse_channels(raw, errors) -> list:
    if "channel" in raw and "channels" in raw:
        errors.append(("channel", "give either 'channel' or 'channels', not both"))
        return []
    specs = [raw["channel"]] if "channel" in raw else raw.get("channels", [])
    base = "channel" if "channel" in raw else "channels"
    if not isinstance(specs, list):
        errors.append((base, "must be a list of channel objects"))
        return []
    out, seen = [], set()
    for i, spec in enumerate(specs):
        path = base if base == "channel" else f"{base}[{i}]"
        if not isinstance(spec, dict):
            errors.append((path, "channel must be an object"))
            continue
        cid = spec.get("id", f"ch{i}")
        if not isinstance(cid, str) or not cid:
            errors.append((f"{path}.id", "must be a non-empty string"))
            continue
        if cid in seen:
            errors.append((f"{path}.id", f"duplicate channel id {cid!r}"))
            continue
        seen.add(cid)
        try:
            T = build_channel(spec)
        except Exception as exc:  # any malformed description is a schema error, never a crash
            errors.append((path, f"{type(exc).__name__}: {exc}"))
            continue
        out.append(ChannelItem(cid, spec, T))
    return out


def _parse_sigma(specs, errors) -> list:
    if not isinstance(specs, list):
        errors.append(("sigma", "must be a list of instances"))
        return []
    out = []
    for i, spec in enumerate(specs):
        path = f"sigma[{i}]"
        if not isinstance(spec, dict):
            errors.append((path, "instance must be an object"))
            continue
        sid = spec.get("id", f"sigma{i}")
        if not isinstance(sid, str) or not sid:
            errors.append((f"{path}.id", "must be a non-empty string"))
            continue
        try:
            alg = io.parse_algebra(spec.get("algebra", {"matrix": 2}))
            A = subalgebra_from_spec(spec.get("A"), alg)
            B = subalgebra_from_spec(spec.get("B"), alg)
        except Exception as exc:  # see _parse_channels
            errors.append((path, f"{type(exc).__name__}: {exc}"))
            continue
        out.append(SigmaItem(sid, A, B))
    return out


def default_config() -> dict:
    """The default suite: small exact families, a Σ-norm pair and the lemma ensemble."""
    pauli_x = [[0, 1], [1, 0]]
    pauli_z = [[1, 0], [0, -1]]
    return {
        "seed": 20240607,
        "p_grid": list(DEFAULT_P_GRID),
        "tasks": list(TASKS),
        "restarts": 6,
        "max_iters": 2000,
        "tol": 1e-10,
        "channels": [
            {"id": "depolarizing-2", "kind": "depolarizing", "n": 2, "lambda": 0.5},
            {"id": "depolarizing-3", "kind": "depolarizing", "n": 3, "lambda": 0.3},
            {"id": "schur-2", "kind": "schur", "mask": [[1, 0.6], [0.6, 1]]},
            {"id": "pauli-mixture", "kind": "random_unitary", "unitaries": [[[1, 0], [0, 1]], pauli_x, pauli_z],
             "weights": [0.5, 0.3, 0.2]},
            {"id": "cyclic-walk", "kind": "stochastic",
             "kernel": [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]]},
            {"id": "diagonal-expectation", "kind": "conditional_expectation", "n": 3, "subalgebra": "diagonal"},
        ],
        "bounds": {"c2": [0.5, 0.9, 0.99]},
        "lemmas": {"instances": 100, "n": 2},
        "sigma": [
            {"id": "rotated-45", "algebra": {"matrix": 2}, "A": "diagonal", "B": "rotated-diagonal(45)"},
            {"id": "rotated-20", "algebra": {"matrix": 2}, "A": "diagonal", "B": "rotated-diagonal(20)"},
        ],
    }


# ---------------------------------------------------------------------------
# running


def item_seed(seed: int, key: str) -> np.random.SeedSequence:
    """Seed for one work item, independent of scheduling order."""
    return np.random.SeedSequence([int(seed), zlib.crc32(key.encode())])


def _error_row(task, cid, exc, p=None, item="") -> ReportRow:
    return ReportRow(task, cid, item=item, p=p, passed=False, reason=f"{type(exc).__name__}: {exc}")


def _guard(task, cid, p=None, item=""):
    def wrap(fn):
        def run():
            try:
                return fn()
            except Exception as exc:  # errors become rows
                return [_error_row(task, cid, exc, p, item)]
        return run
    return wrap


def _validate_items(cfg: ExperimentConfig) -> list:
    jobs = []
    for ch in cfg.channels:
        @_guard("validate", ch.id)
        def job(ch=ch):
            T = ch.channel
            rep = T.validation
            rows = [ReportRow("validate", ch.id, item="markov", passed=rep.valid, reason=rep.reason)]
            if rep.valid:
                try:
                    cert = build_dilation(T)
                except Exception as exc:
                    rows.append(ReportRow("validate", ch.id, item="dilation", passed=True,
                                          reason=f"no certificate: {exc}"))
                else:
                    f = verify_factorization(cert, T)
                    worst = max(f.factor_residual, f.trace_residual, f.homomorphism_residual, f.embedding_residual)
                    rows.append(ReportRow("validate", ch.id, item="dilation", value=worst, passed=f.passed,
                                          reason=f"{cert.n_branches} branches"))
            return rows
        jobs.append(job)
    return jobs


def _gap_items(cfg: ExperimentConfig) -> list:
    jobs = []
    for ch in cfg.channels:
        for p in cfg.p_grid:
            @_guard("gap", ch.id, p)
            def job(ch=ch, p=p):
                T = ch.channel
                if not T.valid:
                    return [ReportRow("gap", ch.id, p=p, passed=False, reason=f"not Markov: {T.validation.reason}")]
                c2 = gap_l2(T).lower
                est = gap_lp(T, p=p, restarts=cfg.restarts, max_iters=cfg.max_iters, tol=cfg.tol,
                             seed=item_seed(cfg.seed, f"gap/{ch.id}/{p!r}"))
                margin = None if est.upper is None else est.upper - est.lower
                ok = margin is None or margin >= -BRACKET_SLACK
                reason = "" if ok else "lower estimate exceeds upper bound"
                if est.upper is None:
                    reason = "no L2 gap; upper bound not available"
                return [ReportRow("gap", ch.id, p=p, c2_exact=c2, cp_lower=est.lower, cp_upper=est.upper,
                                  upper_source=est.upper_source, iterations=est.iterations,
                                  converged=est.converged, margin=margin, value=est.lower, passed=ok,
                                  reason=reason, witness=est.witness)]
            jobs.append(job)
    return jobs


def _bound_rows(cid, c2, p) -> list:
    rep = forward_bound(c2, p)
    gaps = [(f"thm21_case_{i + 1}", b, g) for i, (b, g) in enumerate(zip(rep.thm21_case_bounds, rep.thm21_case_gaps))]
    gaps.append(("thm21_final", rep.thm21_final, rep.thm21_gap))
    gaps.append(("hmo", rep.hmo, rep.hmo_gap))
    if rep.interpolation is not None:
        gaps.append(("interpolation", rep.interpolation, rep.interpolation_gap))
    best = rep.minimum_applicable
    best_gap = {rep.thm21_final: rep.thm21_gap, rep.hmo: rep.hmo_gap}.get(best, 1.0 - best)
    if rep.interpolation is not None and best == rep.interpolation:
        best_gap = rep.interpolation_gap
    gaps.append(("minimum_applicable", best, best_gap))
    rows = []
    for name, value, gap in gaps:
        # a forward bound certifies a gap when it is < 1
        ok = gap > 0
        rows.append(ReportRow("bounds", cid, item=name, p=p, c2_exact=c2,
                              cp_upper=best if name == "minimum_applicable" else None,
                              upper_source=rep.minimum_source if name == "minimum_applicable" else None,
                              margin=gap, value=value, passed=ok, reason="" if ok else "bound does not certify a gap"))
    return rows


def _bounds_items(cfg: ExperimentConfig) -> list:
    jobs = []
    for ch in cfg.channels:
        @_guard("bounds", ch.id)
        def job(ch=ch):
            T = ch.channel
            if not T.valid:
                return [ReportRow("bounds", ch.id, passed=False, reason=f"not Markov: {T.validation.reason}")]
            c2 = gap_l2(T).lower
            if c2 >= 1 - 1e-12:
                return [ReportRow("bounds", ch.id, c2_exact=c2, passed=True,
                                  reason="no L2 gap; forward bounds not applicable")]
            return [r for p in cfg.p_grid for r in _bound_rows(ch.id, c2, p)]
        jobs.append(job)
    for c2 in cfg.bounds_c2:
        cid = f"c2={c2!r}"

        @_guard("bounds", cid)
        def job(c2=c2, cid=cid):
            return [r for p in cfg.p_grid for r in _bound_rows(cid, c2, p)]
        jobs.append(job)
    for p in cfg.p_grid:
        @_guard("bounds", "asymptotic", p)
        def job(p=p):
            rows = []
            for which in ("thm21", "hmo"):
                s = asymptotic_slope(p, which)
                rows.append(ReportRow("bounds", "asymptotic", item=f"slope_{which}", p=p, value=s,
                                      margin=s, passed=s > 0, reason="" if s > 0 else "non-positive slope"))
            return rows
        jobs.append(job)
    return jobs


def _lemma_items(cfg: ExperimentConfig) -> list:
    n, count = cfg.lemma_n, cfg.lemma_instances
    alg = matrix_algebra(n)
    jobs = []

    def inequality_row(name, p, reports):
        worst = min(r.margin for r in reports)
        fails = sum(not r.passed for r in reports)
        return ReportRow("lemmas", name, item=f"{len(reports) - fails}/{len(reports)}", p=p, margin=worst,
                         value=float(len(reports) - fails), passed=fails == 0,
                         reason="" if fails == 0 else f"{fails} violations")

    def ratio_row(name, p, reports, item=""):
        worst = max(r.ratio for r in reports)
        ok = math.isfinite(worst) and worst <= RATIO_CAP
        return ReportRow("lemmas", name, item=item, p=p, value=worst, margin=RATIO_CAP - worst, passed=ok,
                         reason="" if ok else f"empirical constant above {RATIO_CAP:g}")

    for p in cfg.p_grid:
        if p <= 2:
            @_guard("lemmas", "psmall", p)
            def job(p=p):
                rng = np.random.default_rng(item_seed(cfg.seed, f"lemmas/psmall/{p!r}"))
                reps = [check_psmall(random_channel(n, rng), random_positive(alg, rng, rank_deficient=True), p)
                        for _ in range(count)]
                return [inequality_row("psmall", p, reps)]
            jobs.append(job)
        else:
            @_guard("lemmas", "ando", p)
            def job(p=p):
                rng = np.random.default_rng(item_seed(cfg.seed, f"lemmas/ando/{p!r}"))
                reps = [check_ando(random_positive(alg, rng, True), random_positive(alg, rng, True), p)
                        for _ in range(count)]
                return [inequality_row("ando", p, reps)]
            jobs.append(job)

        @_guard("lemmas", "pbig", p)
        def job(p=p):
            rng = np.random.default_rng(item_seed(cfg.seed, f"lemmas/pbig/{p!r}"))
            reps = [check_pbig(random_channel(n, rng), random_positive(alg, rng, True), 1 + 3 * rng.random(), p)
                    for _ in range(count)]
            return [inequality_row("pbig", p, reps)]
        jobs.append(job)

        @_guard("lemmas", "pto2", p)
        def job(p=p):
            rng = np.random.default_rng(item_seed(cfg.seed, f"lemmas/pto2/{p!r}"))
            reps = [check_pto2(random_channel(n, rng), random_element(alg, rng), p) for _ in range(count)]
            return [ratio_row("pto2", p, reps)]
        jobs.append(job)

        if p != 2:
            for q_first in (True, False):
                pp, qq = (2.0, p) if q_first else (p, 2.0)
                item = f"p={pp:g},q={qq:g}"

                @_guard("lemmas", "mazur_holder", p, item)
                def job(p=p, pp=pp, qq=qq, item=item):
                    rng = np.random.default_rng(item_seed(cfg.seed, f"lemmas/mazur/{pp!r}/{qq!r}"))
                    reps = [check_mazur_holder(random_element(alg, rng), random_element(alg, rng), pp, qq)
                            for _ in range(count)]
                    return [ratio_row("mazur_holder", p, reps, item)]
                jobs.append(job)
    return jobs


def _sigma_items(cfg: ExperimentConfig) -> list:
    jobs = []
    for s in cfg.sigma:
        @_guard("sigma", s.id)
        def job(s=s):
            inst = SigmaInstance(s.A, s.B)
            sweep = corollary_sweep(inst, cfg.p_grid, restarts=cfg.restarts, seed=item_seed(cfg.seed, f"sigma/{s.id}"))
            rows = []
            for r in sweep.rows:
                eq = r.equivalence
                margin = eq.paper_bound - eq.worst_ratio if eq.certified else None
                bracket_ok = r.forward.upper is None or r.forward.lower <= r.forward.upper + BRACKET_SLACK
                ok = eq.bound_satisfied and bracket_ok
                reason = eq.status if ok else "equivalence bound violated" if not eq.bound_satisfied else \
                    "lower estimate exceeds upper bound"
                rows.append(ReportRow("sigma", s.id, item="equivalence", p=r.p, c2_exact=eq.c2,
                                      cp_lower=r.forward.lower, cp_upper=r.forward.upper,
                                      upper_source=r.forward.upper_source, iterations=r.forward.iterations,
                                      converged=r.forward.converged, margin=margin, value=eq.worst_ratio,
                                      passed=ok, reason=reason, witness=r.forward.witness))
            ok = sweep.symmetric and sweep.all_or_nothing
            rows.append(ReportRow("sigma", s.id, item="symmetry", c2_exact=sweep.c2_forward,
                                  value=sweep.symmetry_residual, margin=1e-10 - sweep.symmetry_residual,
                                  passed=ok, reason="" if ok else "gap symmetry or all-or-nothing check failed"))
            return rows
        jobs.append(job)
    return jobs


_BUILDERS = {
    "validate": _validate_items,
    "gap": _gap_items,
    "bounds": _bounds_items,
    "lemmas": _lemma_items,
    "sigma": _sigma_items,
}


def run_suite(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Run every configured task; return rows stably sorted by ``(task, channel_id, p)``.

    Work items carry their own seeds, so the result does not depend on
    ``threads``. Task-level exceptions become rows with ``pass=false``.
    """
    jobs = [j for t in cfg.tasks for j in _BUILDERS[t](cfg)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: j(), jobs))
    else:
        results = [j() for j in jobs]
    rows = [r for res in results for r in res]
    return sorted(rows, key=lambda r: (r.task, r.channel_id, -math.inf if r.p is None else r.p))


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r.as_dict().values()])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def rows_to_json(rows, config: dict | None = None) -> str:
    out = []
    for r in rows:
        d = {k: _json_value(v) for k, v in r.as_dict().items()}
        d["witness"] = None if r.witness is None else io.element_to_json(r.witness)
        out.append(d)
    return json.dumps({"columns": list(COLUMNS), "config": config, "rows": out}, indent=1) + "\n"


def write_report(rows, path, format: str = "csv", config: dict | None = None) -> None:
    """Write rows as CSV (``path`` may be ``"-"`` for stdout) or JSON with witnesses."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    text = rows_to_csv(rows) if format == "csv" else rows_to_json(rows, config)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def reevaluate_witness(row: dict, channel) -> float:
    """``||T(w)||_p`` for a JSON row's witness; reproduces ``cp_lower``."""
    w = io.element_from_json(row["witness"])
    return schatten_norm(apply(channel, w), float(row["p"]))


# ---------------------------------------------------------------------------
# command line

COMMAND_TASKS = {
    "validate": ("validate",),
    "estimate": ("gap",),
    "bounds": ("bounds",),
    "lemmas": ("lemmas",),
    "sigma": ("sigma",),
    "report": None,
}


def _parse_p_list(text: str) -> list:
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="markovgap", description="L_p spectral gaps of Markov maps.")
    ap.add_argument("command", choices=list(COMMAND_TASKS))
    ap.add_argument("--config", help="JSON config; the default suite when omitted")
    ap.add_argument("--p", type=_parse_p_list, help="comma-separated exponents, overrides p_grid")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--restarts", type=int)
    ap.add_argument("--c2", type=_parse_p_list, help="extra c2 values for the bounds task")
    ap.add_argument("--out", help="output path; '-' or omitted writes to stdout")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--threads", type=int, default=1)
    return ap


def load_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([("--config", f"cannot read {args.config}: {exc}")]) from None
        try:
            raw = json.loads(text)
        except ValueError as exc:
            raise ConfigError([("$", f"invalid JSON: {exc}")]) from None
    else:
        raw = default_config()
    if isinstance(raw, dict):
        raw = dict(raw)
        tasks = COMMAND_TASKS[args.command]
        if tasks is not None:
            raw["tasks"] = list(tasks)
        if args.p is not None:
            raw["p_grid"] = args.p
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.restarts is not None:
            raw["restarts"] = args.restarts
        if args.c2 is not None:
            raw["bounds"] = {**(raw.get("bounds") or {}), "c2": args.c2}
    return parse_config(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("config error at --threads: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    rows = run_suite(cfg, threads=args.threads)
    out = args.out if args.out is not None else cfg.output
    try:
        write_report(rows, out, args.format, cfg.raw)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS if all(r.passed for r in rows) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
