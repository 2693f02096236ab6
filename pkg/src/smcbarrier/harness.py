"""Experiment driver: repeated runs, efficiency summaries, CSV/JSON output.

A configuration names market and contract terms, barrier windows tiling
[0, maturity], one or more methods, a list of step counts, the ensemble size,
the repetition count and a base seed.  Repetition ``rep`` of every cell uses
seed ``base_seed + rep``, so records are reproducible and independent across
repetitions; repetitions may run in parallel (SMCBARRIER_THREADS) without
changing any price.

Summary standard errors use the grand-mean convention: the reported
``rel_stderr_pct`` is 100 * (std across reps / sqrt(reps)) / |mean|, i.e. the
standard error of the reported mean price.  Efficiency per cell is
alpha = var(prices) * mean(seconds) (convention-free combination), and
kappa = alpha_mc / alpha_smc; kappa compares machines as much as methods and
is labeled machine-dependent in the emitted metadata.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import engine, potentials
from .errors import ConfigError, InsufficientReps
from .model import MarketTermStructure, OptionSpec

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

__all__ = [
    "BarrierWindow", "ExperimentConfig", "RunRecord", "MethodStats",
    "SummaryRow", "EfficiencyReport", "load_config", "run_experiment",
    "summarize", "emit", "KNOWN_METHODS",
]

KNOWN_METHODS = ("mc", "smc", "smc-alt", "smc-is-density", "smc-is-payoff")

RECORD_HEADER = "method,N,M,rep,price,rel_stderr_pct,psi,cpu_seconds,degenerate"
SUMMARY_HEADER = "N,mc_price,mc_stderr_pct,smc_price,smc_stderr_pct,kappa,psi"


@dataclass(frozen=True)
class BarrierWindow:
    t_start: float
    t_end: float
    lower: float = 0.0
    upper: float = float("inf")


@dataclass(frozen=True)
class ExperimentConfig:
    spot: float = 100.0
    strike: float = 100.0
    rate: float = 0.1
    dividend: float = 0.0
    volatility: float = 0.3
    maturity: float = 0.5
    payoff: str = "call"
    monitoring: str = "continuous"
    direction: str = "knock_out"
    windows: tuple[BarrierWindow, ...] = ()
    methods: tuple[str, ...] = ("mc", "smc")
    steps: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    particles: int = 100_000
    repetitions: int = 50
    seed: int = 0
    drift_shift: Optional[float] = None   # smc-is-density proposal; default -(rate-dividend)

    def validate(self) -> "ExperimentConfig":
        if self.spot <= 0:
            raise ConfigError("spot: must be positive")
        if self.strike <= 0:
            raise ConfigError("strike: must be positive")
        if self.volatility <= 0:
            raise ConfigError("volatility: must be positive")
        if self.maturity <= 0:
            raise ConfigError("maturity: must be positive")
        if self.payoff not in ("call", "put"):
            raise ConfigError(f"payoff: must be 'call' or 'put', got {self.payoff!r}")
        if self.monitoring not in ("continuous", "discrete"):
            raise ConfigError(f"monitoring: must be 'continuous' or 'discrete', got {self.monitoring!r}")
        if self.direction not in ("knock_out", "knock_in"):
            raise ConfigError(f"direction: must be 'knock_out' or 'knock_in', got {self.direction!r}")
        if not self.windows:
            raise ConfigError("window: at least one [[window]] section is required")
        spans = sorted(self.windows, key=lambda w: w.t_start)
        if abs(spans[0].t_start) > 1e-12 or abs(spans[-1].t_end - self.maturity) > 1e-12:
            raise ConfigError("window: windows must cover [0, maturity]")
        for a, b in zip(spans, spans[1:]):
            if abs(a.t_end - b.t_start) > 1e-12:
                raise ConfigError("window: windows must tile [0, maturity] without overlap")
        for w in spans:
            if w.lower < 0 or not w.lower < w.upper:
                raise ConfigError("window: need 0 <= lower < upper")
        if not self.methods:
            raise ConfigError("method: at least one method is required")
        for m in self.methods:
            if m not in KNOWN_METHODS:
                raise ConfigError(f"method: unknown method {m!r}, expected one of {KNOWN_METHODS}")
        if any(n < 1 for n in self.steps) or not self.steps:
            raise ConfigError("steps: every step count must be >= 1")
        if self.particles < 2:
            raise ConfigError("particles: must be >= 2")
        if self.repetitions < 2:
            raise ConfigError("reps: must be >= 2 for standard errors")
        return self

    def option(self) -> OptionSpec:
        return OptionSpec(payoff_kind=self.payoff, strike=self.strike, spot=self.spot,
                          monitoring=self.monitoring, direction=self.direction)

    def term_structure(self, n_steps: int) -> MarketTermStructure:
        return MarketTermStructure.from_windows(
            rate=self.rate, dividend=self.dividend, sigma=self.volatility,
            maturity=self.maturity, n_steps=n_steps,
            windows=[(w.t_start, w.t_end, w.lower, w.upper) for w in self.windows])

    def kind_for(self, method: str):
        base = potentials.Continuous() if self.monitoring == "continuous" else potentials.Discrete()
        if method in ("mc", "smc"):
            return base
        if method == "smc-alt":
            return potentials.TruncatedChain()
        if method == "smc-is-density":
            theta = self.drift_shift if self.drift_shift is not None else -(self.rate - self.dividend)
            return potentials.drift_shift_proposal(theta)
        if method == "smc-is-payoff":
            return potentials.PayoffTwist()
        raise ConfigError(f"method: unknown method {method!r}")


def _as_window(entry: dict) -> BarrierWindow:
    known = {"t_start", "t_end", "lower", "upper"}
    extra = set(entry) - known
    if extra:
        raise ConfigError(f"window: unknown keys {sorted(extra)}")
    try:
        return BarrierWindow(float(entry["t_start"]), float(entry["t_end"]),
                             float(entry.get("lower", 0.0)),
                             float(entry.get("upper", float("inf"))))
    except KeyError as exc:
        raise ConfigError(f"window: missing key {exc.args[0]!r}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse a TOML config file (grammar documented in the README)."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config: invalid TOML in {path}: {exc}") from exc
    windows = tuple(_as_window(w) for w in raw.pop("window", []))
    methods = raw.pop("method", ("mc", "smc"))
    if isinstance(methods, str):
        methods = (methods,)
    steps = raw.pop("steps", (1, 2, 4, 8, 16, 32, 64, 128))
    if isinstance(steps, int):
        steps = (steps,)
    scalars = {}
    for key in ("spot", "strike", "rate", "dividend", "volatility", "maturity",
                "payoff", "monitoring", "direction", "particles", "repetitions",
                "seed", "drift_shift"):
        if key in raw:
            scalars[key] = raw.pop(key)
    if raw:
        raise ConfigError(f"config: unknown keys {sorted(raw)}")
    cfg = ExperimentConfig(windows=windows, methods=tuple(methods),
                           steps=tuple(int(n) for n in steps), **scalars)
    return cfg.validate()


@dataclass(frozen=True)
class RunRecord:
    method: str
    n_steps: int
    particles: int
    rep: int
    price: float
    rel_stderr_pct: Optional[float]
    psi: float
    seconds: float
    degenerate: bool


def _single_run(cfg: ExperimentConfig, method: str, n_steps: int, rep: int) -> RunRecord:
    rng = np.random.default_rng(cfg.seed + rep)
    option = cfg.option()
    term = cfg.term_structure(n_steps)
    kind = cfg.kind_for(method)
    if cfg.direction == "knock_in":
        est = engine.price_knock_in(option, term, method, cfg.particles, rng, kind=kind)
    elif method == "mc":
        est = engine.price_mc(option, term, cfg.particles, kind, rng)
    else:
        est = engine.price_smc(option, term, cfg.particles, kind, rng)
    rel = None
    if est.stderr is not None and est.price != 0.0:
        rel = 100.0 * est.stderr / abs(est.price)
    return RunRecord(method=method, n_steps=n_steps, particles=cfg.particles,
                     rep=rep, price=est.price, rel_stderr_pct=rel, psi=est.psi,
                     seconds=est.seconds, degenerate=est.degenerate)


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Execute repetitions x steps x methods; deterministic record set."""
    cfg.validate()
    tasks = [(method, n, rep)
             for method in cfg.methods for n in cfg.steps
             for rep in range(cfg.repetitions)]
    threads = int(os.environ.get("SMCBARRIER_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: _single_run(cfg, *t), tasks))
    else:
        records = [_single_run(cfg, *t) for t in tasks]
    records.sort(key=lambda r: (r.method, r.n_steps, r.rep))
    return records


@dataclass(frozen=True)
class MethodStats:
    method: str
    n_steps: int
    reps: int
    mean_price: float
    rel_stderr_pct: Optional[float]
    total_seconds: float
    alpha: float
    mean_psi: float
    degenerate_count: int


@dataclass(frozen=True)
class SummaryRow:
    n_steps: int
    stats: dict
    kappa: Optional[float]
    psi: Optional[float]


@dataclass(frozen=True)
class EfficiencyReport:
    rows: tuple[SummaryRow, ...]
    smc_method: Optional[str]
    stderr_convention: str = "grand-mean"      # std across reps / sqrt(reps)
    kappa_machine_dependent: bool = True


def summarize(records: Sequence[RunRecord]) -> EfficiencyReport:
    """Per-(method, N) statistics plus the kappa efficiency ratio per N."""
    cells: dict = {}
    for r in records:
        cells.setdefault((r.method, r.n_steps), []).append(r)
    methods = sorted({m for m, _ in cells})
    smc_candidates = [m for m in methods if m != "mc"]
    smc_method = "smc" if "smc" in smc_candidates else (smc_candidates[0] if smc_candidates else None)

    stats: dict = {}
    for (method, n), rs in cells.items():
        if len(rs) < 2:
            raise InsufficientReps(f"cell ({method}, N={n}) has {len(rs)} rep(s); need >= 2")
        prices = np.array([r.price for r in rs])
        seconds = np.array([r.seconds for r in rs])
        mean = float(prices.mean())
        var = float(prices.var(ddof=1))
        grand_stderr = np.sqrt(var / len(rs))
        rel = 100.0 * grand_stderr / abs(mean) if mean != 0.0 else None
        stats[(method, n)] = MethodStats(
            method=method, n_steps=n, reps=len(rs), mean_price=mean,
            rel_stderr_pct=rel, total_seconds=float(seconds.sum()),
            alpha=var * float(seconds.mean()), mean_psi=float(np.mean([r.psi for r in rs])),
            degenerate_count=sum(r.degenerate for r in rs))

    rows = []
    for n in sorted({n for _, n in cells}):
        row_stats = {m: stats[(m, n)] for m in methods if (m, n) in stats}
        kappa = None
        if "mc" in row_stats and smc_method in row_stats:
            denom = row_stats[smc_method].alpha
            if denom > 0:
                kappa = row_stats["mc"].alpha / denom
        psi_source = row_stats.get(smc_method) or row_stats.get("mc")
        rows.append(SummaryRow(n_steps=n, stats=row_stats, kappa=kappa,
                               psi=psi_source.mean_psi if psi_source else None))
    return EfficiencyReport(rows=tuple(rows), smc_method=smc_method)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit(report: EfficiencyReport, records: Sequence[RunRecord], format: str,
         path) -> list[Path]:
    """Write records.csv, summary.(csv|json) and metadata.json under ``path``."""
    if format not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [_write_records(out / "records.csv", records)]
        if format == "csv":
            written.append(_write_summary_csv(out / "summary.csv", report))
        else:
            written.append(_write_summary_json(out / "summary.json", report))
        written.append(_write_metadata(out / "metadata.json", report))
    except OSError as exc:
        raise OSError(f"cannot write experiment output under {out}: {exc}") from exc
    return written


def _write_records(target: Path, records: Sequence[RunRecord]) -> Path:
    with open(target, "w", newline="") as fh:
        fh.write(RECORD_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for r in records:
            writer.writerow([r.method, r.n_steps, r.particles, r.rep, _fmt(r.price),
                             _fmt(r.rel_stderr_pct), _fmt(r.psi), _fmt(r.seconds),
                             _fmt(r.degenerate)])
    return target


def _summary_cells(report: EfficiencyReport):
    for row in report.rows:
        mc = row.stats.get("mc")
        smc = row.stats.get(report.smc_method) if report.smc_method else None
        yield {
            "N": row.n_steps,
            "mc_price": mc.mean_price if mc else None,
            "mc_stderr_pct": mc.rel_stderr_pct if mc else None,
            "smc_price": smc.mean_price if smc else None,
            "smc_stderr_pct": smc.rel_stderr_pct if smc else None,
            "kappa": row.kappa,
            "psi": row.psi,
        }


def _write_summary_csv(target: Path, report: EfficiencyReport) -> Path:
    with open(target, "w", newline="") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for cell in _summary_cells(report):
            writer.writerow([_fmt(cell[k]) for k in
                             ("N", "mc_price", "mc_stderr_pct", "smc_price",
                              "smc_stderr_pct", "kappa", "psi")])
    return target


def _write_summary_json(target: Path, report: EfficiencyReport) -> Path:
    with open(target, "w") as fh:
        json.dump({"rows": list(_summary_cells(report)),
                   "smc_method": report.smc_method,
                   "stderr_convention": report.stderr_convention,
                   "kappa_machine_dependent": report.kappa_machine_dependent},
                  fh, indent=2)
        fh.write("\n")
    return target


def _write_metadata(target: Path, report: EfficiencyReport) -> Path:
    with open(target, "w") as fh:
        json.dump({"stderr_convention": report.stderr_convention,
                   "stderr_note": "rel_stderr_pct is the standard error of the mean "
                                  "over repetitions (std/sqrt(reps)), relative, in percent",
                   "smc_method": report.smc_method,
                   "kappa_machine_dependent": report.kappa_machine_dependent,
                   "kappa_note": "kappa = alpha_mc / alpha_smc with alpha = "
                                 "var(prices) * mean(cpu_seconds); depends on the machine"},
                  fh, indent=2)
        fh.write("\n")
    return target
