"""Seeded Monte Carlo comparison of decoder variants, and exponent sweeps.

Per-trial randomness comes from a counter-based stream: trial ``t`` of a run
with seed ``s`` uses ``numpy.random.Philox`` (Philox4x64-10) keyed with ``s``
and started at counter ``(0, 0, 0, t)``.  Within a trial the draws are, in
order: the outer messages level by level (``Generator.integers``), then one
uniform per channel use for inverse-CDF sampling.  Results therefore do not
depend on the number of workers or on scheduling.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from concatgmd.channel import ChannelModel
from concatgmd.exponents import ExponentCalculator, compute_curve
from concatgmd.gmd import weighted_correlation
from concatgmd.multilevel import ConcatScheme, concat_decode, concat_encode

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
GUARANTEED_VARIANTS = ("revised", "forney")


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


def fmt(x) -> str:
    """Locale-independent numeric formatting with 6 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def wilson_interval(errors: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = errors / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    variant: str
    word_error: bool
    symbol_errors: int
    invocations: int
    accepted: tuple[bool, ...]
    guarantee_levels: int
    guarantee_violations: int


@dataclass(frozen=True)
class SummaryRow:
    variant: str
    trials: int
    word_errors: int
    wer: float
    ci_low: float
    ci_high: float
    symbol_errors: int
    mean_invocations: float
    accept_rate: tuple[float, ...]
    guarantee_trials: int
    guarantee_violations: int


def run_trial(scheme: ConcatScheme, ch: ChannelModel, variants, seed: int, t: int) -> list[TrialRecord]:
    rng = trial_stream(seed, t)
    messages = [rng.integers(0, 1 << kj, size=code.k).tolist() for kj, code in zip(scheme.level_bits, scheme.outer)]
    sent = [code.encode(msg) for code, msg in zip(scheme.outer, messages)]
    y = ch.transmit(concat_encode(scheme, messages), rng)
    records = []
    for variant in variants:
        res = concat_decode(scheme, ch, y, variant)
        word_error = any(list(dec) != list(msg) for dec, msg in zip(res.messages, messages))
        sym_err = sum(
            sum(a != b for a, b in zip(lv.codeword, cw)) for lv, cw in zip(res.levels, sent)
        )
        g_levels = g_viol = 0
        if variant in GUARANTEED_VARIANTS:
            for lv, cw, params in zip(res.levels, sent, scheme.gmd):
                # guarantee applies per level given correct decisions above it
                if weighted_correlation(lv.reliability, lv.estimate, cw) > params.sufficient:
                    g_levels += 1
                    g_viol += list(lv.codeword) != list(cw)
                if list(lv.codeword) != list(cw):
                    break
        records.append(
            TrialRecord(
                t, variant, word_error, int(sym_err), res.outer_invocations,
                tuple(lv.decision.accepted for lv in res.levels), g_levels, int(g_viol),
            )
        )
    return records


def _run_chunk(args) -> list[TrialRecord]:
    scheme, ch, variants, seed, start, stop = args
    out = []
    for t in range(start, stop):
        out.extend(run_trial(scheme, ch, variants, seed, t))
    return out


def simulate(scheme: ConcatScheme, ch: ChannelModel, trials: int, seed: int, variants, workers: int = 1) -> list[TrialRecord]:
    """All per-trial records, sorted by (trial, variant order)."""
    variants = list(variants)
    if workers <= 1:
        records = _run_chunk((scheme, ch, variants, seed, 0, trials))
    else:
        n_chunks = min(trials, workers * 4)
        bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
        jobs = [(scheme, ch, variants, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for chunk in pool.map(_run_chunk, jobs) for r in chunk]
    rank = {v: i for i, v in enumerate(variants)}
    records.sort(key=lambda r: (r.trial, rank[r.variant]))
    return records


def summarize(records: list[TrialRecord], variants) -> list[SummaryRow]:
    rows = []
    for v in variants:
        recs = [r for r in records if r.variant == v]
        n = len(recs)
        errs = sum(r.word_error for r in recs)
        lo, hi = wilson_interval(errs, n)
        levels = len(recs[0].accepted)
        rows.append(
            SummaryRow(
                variant=v,
                trials=n,
                word_errors=errs,
                wer=errs / n,
                ci_low=lo,
                ci_high=hi,
                symbol_errors=sum(r.symbol_errors for r in recs),
                mean_invocations=sum(r.invocations for r in recs) / n,
                accept_rate=tuple(sum(r.accepted[j] for r in recs) / n for j in range(levels)),
                guarantee_trials=sum(r.guarantee_levels > 0 for r in recs),
                guarantee_violations=sum(r.guarantee_violations for r in recs),
            )
        )
    return rows


SUMMARY_HEADER = [
    "variant", "trials", "word_errors", "wer", "wer_ci_low", "wer_ci_high",
    "symbol_errors", "mean_invocations", "accept_rate", "guarantee_trials", "guarantee_violations",
]
TRIAL_HEADER = [
    "trial", "variant", "word_error", "symbol_errors", "invocations", "accepted",
    "guarantee_levels", "guarantee_violations",
]
CURVE_HEADER = ["variant", "R_nats", "R_bits", "E_nats", "rho_star", "ro_star", "pX_star", "channel_id"]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def summary_csv(rows: list[SummaryRow]) -> str:
    return _csv_text(
        SUMMARY_HEADER,
        [
            [
                r.variant, fmt(r.trials), fmt(r.word_errors), fmt(r.wer), fmt(r.ci_low), fmt(r.ci_high),
                fmt(r.symbol_errors), fmt(r.mean_invocations), ";".join(fmt(a) for a in r.accept_rate),
                fmt(r.guarantee_trials), fmt(r.guarantee_violations),
            ]
            for r in rows
        ],
    )


def trials_csv(records: list[TrialRecord]) -> str:
    return _csv_text(
        TRIAL_HEADER,
        [
            [
                fmt(r.trial), r.variant, fmt(r.word_error), fmt(r.symbol_errors), fmt(r.invocations),
                ";".join(fmt(a) for a in r.accepted), fmt(r.guarantee_levels), fmt(r.guarantee_violations),
            ]
            for r in records
        ],
    )


def curve_rows(curve) -> list[list[str]]:
    rows = []
    for pt in curve.points:
        rows.append([
            curve.variant,
            fmt(pt.R),
            fmt(pt.R / math.log(2)),
            fmt(pt.E),
            "" if pt.rho is None else fmt(pt.rho),
            "" if pt.r_o is None else fmt(pt.r_o),
            "" if pt.p_X is None else ";".join(fmt(v) for v in pt.p_X),
            curve.channel_id,
        ])
    return rows


def write_atomic(path, text: str) -> None:
    """Write via a temporary file so a failed run never leaves partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_simulation(cfg) -> tuple[list[SummaryRow], list[TrialRecord]]:
    log.info(
        "simulating %d trials, m=%d, N_o=%d, N_i=%d, R=%.6g nats, variants=%s",
        cfg.trials, cfg.scheme.m, cfg.scheme.N_o, cfg.scheme.N_i, cfg.scheme.rate, ",".join(cfg.variants),
    )
    records = simulate(cfg.scheme, cfg.channel, cfg.trials, cfg.seed, cfg.variants, cfg.workers)
    rows = summarize(records, cfg.variants)
    if cfg.output:
        write_atomic(cfg.output, summary_csv(rows))
    if cfg.trial_log:
        write_atomic(cfg.trial_log, trials_csv(records))
    return rows, records


class SweepError(ValueError):
    pass


def run_exponent_sweep(cfg) -> list:
    calc = ExponentCalculator(cfg.channel)
    rates = [R for R in cfg.rates if 0 < R < calc.C]
    if len(rates) < len(cfg.rates):
        log.warning("dropped %d rate(s) outside (0, C=%.6g)", len(cfg.rates) - len(rates), calc.C)
    if not rates:
        raise SweepError(f"no requested rate lies in (0, C={calc.C:.6g})")
    rates = sorted(set(rates))
    curves = [compute_curve(calc, name, rates, m) for name, m in cfg.variants]
    if cfg.output:
        write_atomic(cfg.output, _csv_text(CURVE_HEADER, [row for c in curves for row in curve_rows(c)]))
    return curves
