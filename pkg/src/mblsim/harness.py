"""Experiment harness: seeded ensembles, statistics, and deterministic output.

Realizations are independent workers indexed by realization number; every
random draw comes from a Philox substream keyed by (seed, realization, role),
and aggregation sorts by index, so results are byte-identical for any thread
count. Bootstrap resampling is keyed by the config hash.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from . import _kernels
from .dynamics import (
    EigenSystem,
    commutator_norm_sweep,
    eigendecompose,
    transmission_time,
)
from .errors import ConfigurationError, DomainError, NumericalError
from .freefermion import build_M, kernel_rows
from .models import (
    DisorderSpec,
    IsingParams,
    ROLE_ANISOTROPIES,
    ROLE_COUPLINGS,
    ROLE_FIELDS,
    ROLE_MASK,
    SparsePerturbation,
    XYParams,
    apply_sparse_perturbation,
    build_ising_hamiltonian,
    build_xy_hamiltonian,
    make_sparse_perturbation,
    substream_id,
)

BOOTSTRAP_RESAMPLES = 1000


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "seed",
    "realizations",
    "model",
    "time_grid",
    "localize",
    "evolve",
    "ttime",
    "lioms",
    "lrbound",
    "gaps",
    "output",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration plus its canonical hash."""

    raw: dict
    seed: int
    realizations: int
    model: dict
    time_grid: dict
    output_dir: str
    config_hash: str

    def section(self, name: str) -> dict:
        blk = self.raw.get(name)
        if blk is None:
            raise ConfigurationError(f"config is missing the '{name}' section")
        return blk


def config_hash(raw: dict) -> str:
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def validate_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    seed = raw.get("seed")
    if not isinstance(seed, int) or not 0 <= seed < 2**63:
        raise ConfigurationError("seed must be a nonnegative 63-bit integer")
    realizations = raw.get("realizations", 1)
    if not isinstance(realizations, int) or realizations < 1:
        raise ConfigurationError("realizations must be a positive integer")
    model = raw.get("model")
    if not isinstance(model, dict) or model.get("type") not in ("xy", "ising"):
        raise ConfigurationError("model.type must be 'xy' or 'ising'")
    n = model.get("n")
    if not isinstance(n, int) or n < 1:
        raise ConfigurationError("model.n must be an integer >= 1")
    time_grid = raw.get("time_grid", {"kind": "linear", "t_max": 50.0, "points": 200})
    output = raw.get("output", {})
    out_dir = output.get("dir", "out")
    return ExperimentConfig(
        raw=raw,
        seed=seed,
        realizations=realizations,
        model=model,
        time_grid=time_grid,
        output_dir=out_dir,
        config_hash=config_hash(raw),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    return validate_config(raw)


def make_time_grid(spec: dict) -> np.ndarray:
    kind = spec.get("kind", "linear")
    t_max = float(spec.get("t_max", 50.0))
    points = int(spec.get("points", 200))
    if t_max <= 0 or points < 2:
        raise ConfigurationError("time_grid needs t_max > 0 and points >= 2")
    if kind == "linear":
        return np.linspace(0.0, t_max, points)
    if kind == "log":
        t_min = float(spec.get("t_min", t_max / 1000.0))
        if not 0 < t_min < t_max:
            raise ConfigurationError("time_grid needs 0 < t_min < t_max")
        return np.concatenate([[0.0], np.geomspace(t_min, t_max, points - 1)])
    raise ConfigurationError(f"unknown time_grid kind {kind!r}")


def _disorder_spec(block: dict, seed: int, stream: int) -> DisorderSpec:
    if not isinstance(block, dict) or "distribution" not in block:
        raise ConfigurationError("distribution block needs a 'distribution' key")
    return DisorderSpec(
        distribution=block["distribution"],
        seed=seed,
        stream_id=stream,
        value=float(block.get("value", 0.0)),
        low=float(block.get("low", -1.0)),
        high=float(block.get("high", 1.0)),
        p_zero=float(block.get("p_zero", 0.5)),
    )


def realize_xy(model: dict, seed: int, realization: int, n: int | None = None) -> XYParams:
    """Sample one XY disorder realization from the model block."""
    from .models import sample_sequence

    n = int(model["n"] if n is None else n)
    mu = sample_sequence(
        _disorder_spec(model.get("mu", {"distribution": "constant", "value": 1.0}),
                       seed, substream_id(realization, ROLE_COUPLINGS)), n)
    gamma = sample_sequence(
        _disorder_spec(model.get("gamma", {"distribution": "constant", "value": 0.0}),
                       seed, substream_id(realization, ROLE_ANISOTROPIES)), n)
    omega = sample_sequence(
        _disorder_spec(model.get("field", {"distribution": "uniform", "low": -1.0, "high": 1.0}),
                       seed, substream_id(realization, ROLE_FIELDS)), n + 1)
    return XYParams(n=n, mu=mu, gamma=gamma, omega=omega, lam=float(model.get("lambda", 0.0)))


def realize_ising(model: dict, seed: int, realization: int, n: int | None = None) -> IsingParams:
    from .models import sample_sequence

    n = int(model["n"] if n is None else n)
    j = sample_sequence(
        _disorder_spec(model.get("coupling", {"distribution": "uniform", "low": 0.5, "high": 1.5}),
                       seed, substream_id(realization, ROLE_COUPLINGS)), n)
    big_gamma = sample_sequence(
        _disorder_spec(model.get("transverse", {"distribution": "uniform", "low": 0.5, "high": 1.5}),
                       seed, substream_id(realization, ROLE_ANISOTROPIES)), n + 1)
    h = sample_sequence(
        _disorder_spec(model.get("longitudinal", {"distribution": "uniform", "low": 0.5, "high": 1.5}),
                       seed, substream_id(realization, ROLE_FIELDS)), n + 1)
    return IsingParams(
        n=n, j=j, big_gamma=big_gamma, h=h, gamma_scale=float(model.get("gamma_scale", 1.0))
    )


def realize_perturbation(
    model: dict, seed: int, realization: int, n: int | None = None
) -> SparsePerturbation | None:
    blk = model.get("perturbation")
    if blk is None:
        return None
    n = int(model["n"] if n is None else n)
    return make_sparse_perturbation(
        n=n,
        p_zero=float(blk.get("p_zero", 0.9)),
        seed=seed,
        stream_id=substream_id(realization, ROLE_MASK),
        strength=float(blk.get("strength", 1.0)),
    )


def build_realization(model: dict, seed: int, realization: int, n: int | None = None):
    """(interaction, H, chain) for one realization of the configured model."""
    from .dynamics import DIM_CAP
    from .errors import ResourceLimitError

    n_sites = int(model["n"] if n is None else n) + 1
    if 2**n_sites > DIM_CAP:
        raise ResourceLimitError(
            f"chain with {n_sites} sites exceeds the dense-dynamics cap of {DIM_CAP}"
        )
    if model["type"] == "xy":
        params = realize_xy(model, seed, realization, n=n)
        phi, H = build_xy_hamiltonian(params)
        pert = realize_perturbation(model, seed, realization, n=n)
        if pert is not None:
            phi, H = apply_sparse_perturbation(phi, pert)
        return phi, H, phi.chain
    params = realize_ising(model, seed, realization, n=n)
    phi, H = build_ising_hamiltonian(params)
    return phi, H, phi.chain


# ---------------------------------------------------------------------------
# worker pool
# ---------------------------------------------------------------------------


def run_indexed(worker, count: int, threads: int = 1) -> list:
    """worker(i) for i in range(count), results ordered by index."""
    if threads <= 1:
        return [worker(i) for i in range(count)]
    out = [None] * count
    with ThreadPoolExecutor(max_workers=threads) as ex:
        futures = {ex.submit(worker, i): i for i in range(count)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out


# ---------------------------------------------------------------------------
# localization experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    eta: float
    eta_se: float
    intercept: float
    used: np.ndarray


@dataclass(frozen=True)
class LocalizationReport:
    engine: str
    n: int
    distances: np.ndarray
    values: np.ndarray  # (realizations, n_distances)
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    fit: FitResult
    chi: float
    beta: float
    config_hash: str


def bootstrap_mean_ci(
    values: np.ndarray, rng: np.random.Generator, resamples: int = BOOTSTRAP_RESAMPLES
) -> tuple[float, float]:
    """Percentile 95% CI of the mean under resampling with replacement."""
    r = values.shape[0]
    idx = rng.integers(0, r, size=(resamples, r))
    means = values[idx].mean(axis=1)
    return float(np.percentile(means, 2.5)), float(np.percentile(means, 97.5))


def weighted_loglinear_fit(distances, means, ses) -> FitResult:
    """Fit log(mean) = intercept - eta * distance, weighted by the delta-method
    variance of the log; distances with nonpositive means are dropped."""
    d = np.asarray(distances, dtype=float)
    m = np.asarray(means, dtype=float)
    s = np.asarray(ses, dtype=float)
    used = m > 0
    if used.sum() < 2:
        raise NumericalError("need at least two positive means for the decay fit")
    d, m, s = d[used], m[used], s[used]
    y = np.log(m)
    sig = np.maximum(s / m, 1e-12)
    w = 1.0 / sig**2
    X = np.column_stack([np.ones_like(d), -d])
    xtwx = X.T @ (w[:, None] * X)
    xtwy = X.T @ (w * y)
    try:
        cov = np.linalg.inv(xtwx)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular design in decay fit") from exc
    coef = cov @ xtwy
    return FitResult(
        eta=float(coef[1]),
        eta_se=float(np.sqrt(max(cov[1, 1], 0.0))),
        intercept=float(coef[0]),
        used=used,
    )


def _summarize_localization(
    engine: str,
    n: int,
    distances: np.ndarray,
    values: np.ndarray,
    chi: float,
    beta: float,
    cfg_hash: str,
) -> LocalizationReport:
    rng = np.random.Generator(
        np.random.Philox(key=int(cfg_hash[:16], 16) ^ 0xB007)
    )
    mean = values.mean(axis=0)
    ci = np.array([bootstrap_mean_ci(values[:, i], rng) for i in range(values.shape[1])])
    ses = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0]) if values.shape[0] > 1 else np.zeros_like(mean)
    fit = weighted_loglinear_fit(distances, mean, ses)
    return LocalizationReport(
        engine=engine,
        n=n,
        distances=np.asarray(distances, dtype=float),
        values=values,
        mean=mean,
        ci_low=ci[:, 0],
        ci_high=ci[:, 1],
        fit=fit,
        chi=chi,
        beta=beta,
        config_hash=cfg_hash,
    )


def run_localization_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Distance-resolved decay of the chosen estimator over the ensemble.

    engine 'one_body' reads kernel rows from the free-fermion reduction,
    'many_body' measures the Pauli commutator estimator, 'both' runs the two
    on identical draws and reports the eta agreement."""
    blk = cfg.section("localize")
    engine = blk.get("engine", "one_body")
    if engine not in ("one_body", "many_body", "both"):
        raise ConfigurationError("localize.engine must be one_body, many_body, or both")
    if cfg.model["type"] != "xy":
        raise ConfigurationError("localization experiment requires the xy model")
    distances = np.asarray(blk.get("distances", [1, 2, 3, 4]), dtype=int)
    source = int(blk.get("source", 0))
    n = int(cfg.model["n"])
    if np.any(distances < 1) or np.any(source + distances > n) :
        raise ConfigurationError("distances must fit between the source and the chain end")
    beta = float(blk.get("beta", 0.0))
    grid = make_time_grid(cfg.time_grid)
    chi = 4.0  # chi(|X|) = 4^|X| with single-site X

    def one_body_worker(r: int) -> np.ndarray:
        params = realize_xy(cfg.model, cfg.seed, r)
        M = build_M(params)
        row = kernel_rows(M, [source], time_grid=grid, refine=blk.get("refine", True))[0]
        return row[source + distances]

    def many_body_worker(r: int) -> np.ndarray:
        _, H, chain = build_realization(cfg.model, cfg.seed, r)
        es = eigendecompose(H, chain=chain)
        raw = commutator_norm_sweep(
            es, (source,), [(source + int(d),) for d in distances], grid
        )
        weights = chi * (1.0 + np.abs(grid) ** beta)
        return (raw / weights[:, None]).max(axis=0)

    reports = {}
    if engine in ("one_body", "both"):
        vals = np.array(run_indexed(one_body_worker, cfg.realizations, threads))
        reports["one_body"] = _summarize_localization(
            "one_body", n, distances, vals, 1.0, 0.0, cfg.config_hash
        )
    if engine in ("many_body", "both"):
        vals = np.array(run_indexed(many_body_worker, cfg.realizations, threads))
        reports["many_body"] = _summarize_localization(
            "many_body", n, distances, vals, chi, beta, cfg.config_hash
        )
    if engine == "both":
        a, b = reports["one_body"].fit, reports["many_body"].fit
        combined = float(np.hypot(a.eta_se, b.eta_se))
        reports["agreement"] = {
            "eta_one_body": a.eta,
            "eta_many_body": b.eta,
            "combined_se": combined,
            "difference": abs(a.eta - b.eta),
            "agrees_2se": bool(abs(a.eta - b.eta) <= 2.0 * combined),
        }
        return reports
    return reports[engine]


# ---------------------------------------------------------------------------
# transmission scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingParams:
    """Inputs of the superlinear-transmission constraint."""

    eta: float
    beta: float
    alpha: float
    p_zero: float

    def __post_init__(self):
        if self.eta <= 0:
            raise DomainError("eta must be positive")
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")
        if not 0.0 < self.alpha < 1.0 / 3.0:
            raise DomainError("alpha must lie in (0, 1/3)")
        if not 0.0 < self.p_zero <= 1.0:
            raise DomainError("p_zero must lie in (0, 1]")


def constraint_satisfied(sp: ScalingParams, gamma: float) -> bool:
    """Raw inequality: eta (1-3a)/(1-a) > 2[(beta+1) gamma - 1] log(1/p)."""
    lhs = sp.eta * (1.0 - 3.0 * sp.alpha) / (1.0 - sp.alpha)
    rhs = 2.0 * ((sp.beta + 1.0) * gamma - 1.0) * np.log(1.0 / sp.p_zero)
    return bool(lhs > rhs)


def constraint_report(sp: ScalingParams) -> dict:
    """Closed-form largest admissible growth exponent and its ingredients."""
    logp = np.log(1.0 / sp.p_zero)
    budget = sp.eta * (1.0 - 3.0 * sp.alpha) / (1.0 - sp.alpha)
    if logp == 0.0:
        gamma_max = float("inf")  # p_zero = 1: no perturbed bonds, unconstrained
    else:
        gamma_max = (1.0 / (sp.beta + 1.0)) * (1.0 + budget / (2.0 * logp))
    return {
        "eta": sp.eta,
        "beta": sp.beta,
        "alpha": sp.alpha,
        "p_zero": sp.p_zero,
        "decay_budget": float(budget),
        "log_inv_p": float(logp),
        "gamma_max": gamma_max,
        "superlinear": bool(gamma_max > 1.0),
    }


@dataclass(frozen=True)
class ScalingRow:
    n: int
    epsilon: float
    median_t: float  # nan when the median realization is censored
    q25: float
    q75: float
    censored_fraction: float
    realizations: int


@dataclass(frozen=True)
class ScalingResult:
    rows: tuple
    records: tuple  # per-realization dicts
    config_hash: str


def _quantile_censored(values: list[float | None], q: float) -> float:
    """Quantile treating censored entries (None) as +infinity."""
    arr = np.array([np.inf if v is None else v for v in values], dtype=float)
    arr.sort()
    k = int(np.ceil(q * arr.shape[0])) - 1
    v = arr[max(k, 0)]
    return float(v) if np.isfinite(v) else float("nan")


def epsilon_schedule(blk: dict, n: int) -> float:
    mode = blk.get("mode", "fixed")
    if mode == "fixed":
        return float(blk["value"])
    if mode == "decay":
        eta = blk.get("eta")
        if eta is None:
            raise ConfigurationError("epsilon.mode=decay needs an 'eta' value")
        alpha = float(blk.get("alpha", 1.0))
        pref = float(blk.get("prefactor", 1.0))
        return pref * float(np.exp(-alpha * float(eta) * n))
    raise ConfigurationError(f"unknown epsilon mode {mode!r}")


def run_transmission_scaling(cfg: ExperimentConfig, threads: int = 1) -> ScalingResult:
    """Median transmission times across a size sweep, with censoring."""
    blk = cfg.section("ttime")
    sizes = [int(v) for v in blk.get("sizes", [4, 5, 6, 7, 8])]
    eps_blk = blk.get("epsilon", {"mode": "fixed", "value": 0.1})
    grid = make_time_grid(blk.get("time_grid", cfg.time_grid))
    tol = float(blk.get("bisection_tol", 1e-3))
    rows = []
    records = []
    for n in sizes:
        eps = epsilon_schedule(eps_blk, n)

        def worker(r: int, n=n, eps=eps):
            _, H, chain = build_realization(cfg.model, cfg.seed, r, n=n)
            es = eigendecompose(H, chain=chain)
            return transmission_time(es, eps, grid, bisection_tol=tol)

        results = run_indexed(worker, cfg.realizations, threads)
        t_vals = [None if res.censored else res.t_est for res in results]
        censored_fraction = sum(res.censored for res in results) / len(results)
        rows.append(
            ScalingRow(
                n=n,
                epsilon=eps,
                median_t=_quantile_censored(t_vals, 0.5),
                q25=_quantile_censored(t_vals, 0.25),
                q75=_quantile_censored(t_vals, 0.75),
                censored_fraction=float(censored_fraction),
                realizations=len(results),
            )
        )
        for r, res in enumerate(results):
            records.append(
                {
                    "n": n,
                    "realization": r,
                    "epsilon": eps,
                    "t_est": res.t_est,
                    "censored": res.censored,
                    "bracket": list(res.bracket) if res.bracket else None,
                    "horizon": res.horizon,
                }
            )
    return ScalingResult(rows=tuple(rows), records=tuple(records), config_hash=cfg.config_hash)


# ---------------------------------------------------------------------------
# gap statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapStatistics:
    min_gaps: np.ndarray
    zero_events: int
    cdf_deltas: np.ndarray
    cdf_values: np.ndarray
    tail_exponent: float
    tail_points: int
    config_hash: str


def run_gap_statistics(cfg: ExperimentConfig, threads: int = 1) -> GapStatistics:
    """Minimum spectral gaps over the ensemble and their empirical CDF.

    The small-delta tail slope estimates the level-repulsion exponent; it is
    reported with its fit size, never asserted."""
    blk = cfg.raw.get("gaps", {})
    curve_points = int(blk.get("curve_points", 40))

    def worker(r: int) -> float:
        _, H, chain = build_realization(cfg.model, cfg.seed, r)
        energies = np.linalg.eigvalsh(H.matrix)
        return float(np.diff(energies).min())

    gaps = np.array(run_indexed(worker, cfg.realizations, threads))
    zero_events = int((gaps < 1e-13).sum())
    positive = gaps[gaps > 0]
    if positive.size == 0:
        raise NumericalError("all realizations produced zero minimum gap")
    deltas = np.geomspace(positive.min() * 0.5, gaps.max() * 2.0, curve_points)
    cdf = np.array([(gaps < d).mean() for d in deltas])
    lo_mask = (cdf > 0) & (cdf < 0.5)
    if lo_mask.sum() >= 3:
        x = np.log(deltas[lo_mask])
        y = np.log(cdf[lo_mask])
        slope = float(np.polyfit(x, y, 1)[0])
        pts = int(lo_mask.sum())
    else:
        slope, pts = float("nan"), 0
    return GapStatistics(
        min_gaps=gaps,
        zero_events=zero_events,
        cdf_deltas=deltas,
        cdf_values=cdf,
        tail_exponent=slope,
        tail_points=pts,
        config_hash=cfg.config_hash,
    )


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> int:
    count = 0
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            count += 1
    return count


def emit_results(
    out_dir,
    cfg: ExperimentConfig,
    tables: dict[str, tuple[list[str], list]],
    extra: dict | None = None,
    wall_time_s: float | None = None,
) -> dict:
    """Write CSV tables plus a manifest with config hash, versions, and seeds."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for name, (header, rows) in sorted(tables.items()):
        rows_written = write_csv(out / f"{name}.csv", header, rows)
        outputs[f"{name}.csv"] = {"rows": rows_written}
    manifest = {
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "realizations": cfg.realizations,
        "config": cfg.raw,
        "versions": {
            "package": _pkg_version,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "kernel_backend": _kernels.backend(),
        "outputs": outputs,
    }
    if wall_time_s is not None:
        manifest["wall_time_s"] = wall_time_s
    if extra:
        manifest["results"] = extra
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def localization_tables(report: LocalizationReport, prefix: str) -> dict:
    summary_rows = [
        (
            int(report.distances[i]),
            report.mean[i],
            report.ci_low[i],
            report.ci_high[i],
            report.values.shape[0],
        )
        for i in range(report.distances.shape[0])
    ]
    raw_rows = [
        (r, int(report.distances[i]), report.values[r, i])
        for r in range(report.values.shape[0])
        for i in range(report.distances.shape[0])
    ]
    return {
        f"{prefix}_summary": (
            ["distance", "mean", "ci_low", "ci_high", "realizations"],
            summary_rows,
        ),
        f"{prefix}_raw": (["realization", "distance", "value"], raw_rows),
    }


def scaling_tables(result: ScalingResult) -> dict:
    rows = [
        (
            row.n,
            row.epsilon,
            row.median_t,
            row.q25,
            row.q75,
            row.censored_fraction,
            row.realizations,
        )
        for row in result.rows
    ]
    rec_rows = [
        (
            rec["n"],
            rec["realization"],
            rec["epsilon"],
            rec["t_est"],
            rec["censored"],
            rec["bracket"][0] if rec["bracket"] else None,
            rec["bracket"][1] if rec["bracket"] else None,
        )
        for rec in result.records
    ]
    return {
        "transmission_scaling": (
            ["n", "epsilon", "median_t", "q25", "q75", "censored_fraction", "realizations"],
            rows,
        ),
        "transmission_raw": (
            ["n", "realization", "epsilon", "t_est", "censored", "bracket_lo", "bracket_hi"],
            rec_rows,
        ),
    }


def gap_tables(stats: GapStatistics) -> dict:
    return {
        "gap_minima": (
            ["realization", "min_gap"],
            [(r, g) for r, g in enumerate(stats.min_gaps)],
        ),
        "gap_cdf": (
            ["delta", "cdf"],
            list(zip(stats.cdf_deltas, stats.cdf_values)),
        ),
    }
