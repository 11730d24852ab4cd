"""Seeded Monte Carlo experiments over (p, n) grids."""

from __future__ import annotations

import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import AggregationError, ConfigurationError, NumericalError, SpikeCountError
from .estimators import (
    GapEstimatorSettings,
    KnSettings,
    estimate_q_known_variance,
    estimate_q_unknown_variance,
    kn_estimate_result,
)
from .model import AspectRatio, SpikeSpec, factor_to_spike
from .sampling import NOISE_KINDS, SampleSeed, sample_spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ESTIMATORS = ("gap_known", "gap_unknown", "kn")
DEFAULT_ROOT_SEED = 20240917
DEFAULT_REPLICATIONS = 1000
LARGE_KN_REPLICATIONS = 200

Settings = Union[GapEstimatorSettings, KnSettings]


@dataclass(frozen=True)
class ExperimentConfig:
    model_id: str
    spikes: SpikeSpec
    sizes: tuple[tuple[int, int], ...]
    replications: int = DEFAULT_REPLICATIONS
    estimator: str = "gap_known"
    estimator_settings: Optional[Settings] = None
    noise_kind: str = "gaussian"
    root_seed: int = DEFAULT_ROOT_SEED
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple((int(p), int(n)) for p, n in self.sizes))
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigurationError(f"unknown noise kind {self.noise_kind!r}")
        if self.replications < 1:
            raise ConfigurationError("replications must be at least 1")
        if not self.sizes:
            raise ConfigurationError("at least one (p, n) size is required")
        if not 0 <= self.root_seed < 2**64:
            raise ConfigurationError(f"root seed must be a 64-bit unsigned integer, got {self.root_seed}")
        settings = self.estimator_settings
        if settings is None:
            settings = KnSettings() if self.estimator == "kn" else GapEstimatorSettings()
            object.__setattr__(self, "estimator_settings", settings)
        expected = KnSettings if self.estimator == "kn" else GapEstimatorSettings
        if not isinstance(settings, expected):
            raise ConfigurationError(f"estimator {self.estimator!r} needs {expected.__name__}")
        for p, n in self.sizes:
            if p < self.spikes.q0 + 2 or n < 3:
                raise ConfigurationError(f"size (p={p}, n={n}) too small for q0={self.spikes.q0}")

    def with_overrides(self, replications=None, root_seed=None) -> "ExperimentConfig":
        changes = {}
        if replications is not None:
            changes["replications"] = replications
        if root_seed is not None:
            changes["root_seed"] = root_seed
        return replace(self, **changes)


@dataclass
class SummaryStats:
    counts: dict
    mean_q: float
    mse_q: float
    freq_correct: float
    q0_true: int
    replications: int
    mean_sigma2: Optional[float] = None
    mse_sigma2: Optional[float] = None

    def frequencies(self) -> dict:
        return {q: c / self.replications for q, c in sorted(self.counts.items())}


def summarize(q_hats, sigma2_hats=None, q0_true=0, sigma2_true=None) -> SummaryStats:
    q = np.asarray(list(q_hats), dtype=int)
    if q.size == 0:
        raise AggregationError("cannot summarise an empty sample")
    values, counts = np.unique(q, return_counts=True)
    table = {int(v): int(c) for v, c in zip(values, counts)}
    mean_sigma2 = mse_sigma2 = None
    if sigma2_hats is not None:
        s = np.asarray(list(sigma2_hats), dtype=float)
        if s.size != q.size:
            raise AggregationError(f"{q.size} counts but {s.size} variance estimates")
        mean_sigma2 = float(s.mean())
        if sigma2_true is not None:
            mse_sigma2 = float(np.mean((s - sigma2_true) ** 2))
    return SummaryStats(
        counts=table,
        mean_q=float(q.mean()),
        mse_q=float(np.mean((q - q0_true) ** 2)),
        freq_correct=table.get(q0_true, 0) / q.size,
        q0_true=q0_true,
        replications=int(q.size),
        mean_sigma2=mean_sigma2,
        mse_sigma2=mse_sigma2,
    )


def run_replication(config: ExperimentConfig, p: int, n: int, r: int):
    """Sample replication ``r`` at size ``(p, n)``; return ``(q_hat, sigma2_hat or None)``."""
    try:
        spectrum = sample_spectrum(config.spikes, AspectRatio(p, n),
                                   SampleSeed(config.root_seed, r), config.noise_kind)
        settings = config.estimator_settings
        if config.estimator == "gap_known":
            return estimate_q_known_variance(spectrum, config.spikes.sigma2, settings), None
        if config.estimator == "gap_unknown":
            result = estimate_q_unknown_variance(spectrum, settings)
            return result.q_hat, result.sigma2_hat
        result = kn_estimate_result(spectrum, settings)
        return result.q_hat, (result.sigma2_hat if settings.sigma2 is None else None)
    except (SpikeCountError, np.linalg.LinAlgError) as exc:
        cls = NumericalError if isinstance(exc, (NumericalError, np.linalg.LinAlgError)) else ConfigurationError
        raise cls(f"{config.model_id}: replication failed at p={p}, n={n}, r={r}: {exc}") from exc


def run_size(config: ExperimentConfig, p: int, n: int, threads: int = 1) -> SummaryStats:
    reps = range(config.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: run_replication(config, p, n, r), reps))
    else:
        results = [run_replication(config, p, n, r) for r in reps]
    q_hats = [q for q, _ in results]
    sig = [s for _, s in results]
    sigma2_hats = sig if all(s is not None for s in sig) else None
    return summarize(q_hats, sigma2_hats, config.spikes.q0, config.spikes.sigma2)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> dict:
    """Map every ``(p, n)`` of the config to its :class:`SummaryStats`."""
    return {(p, n): run_size(config, p, n, threads) for p, n in config.sizes}


# ----------------------------------------------------------------------------
# built-in experiments

MODEL_SPIKES = {
    "model1": [259.72, 17.97, 11.04, 7.88, 4.82],
    "model2": [7, 6, 5, 4],
    "model3": [259.7, 259.7, 18, 11.1, 7.9, 4.8],
    "model4": [7, 6, 6, 6, 5, 4],
}

SIZES = {
    "c03": ((30, 100), (60, 200), (120, 400), (240, 800)),
    "c06": ((60, 100), (120, 200), (240, 400), (480, 800)),
}

# (p, n) -> spikes recovered from the loading matrices of the moment-matching study
HARDING_SPIKES = {
    (30, 100): [258.719, 16.973, 10.038, 6.877, 3.817],
    (90, 100): [259.010, 18.101, 10.785, 7.276, 3.692],
    (210, 300): [259.083, 18.418, 10.992, 7.377, 3.649],
    (250, 500): [259.005, 18.453, 11.057, 7.448, 3.634],
}

# name -> (factor strengths, noise variance, (p, n) at p = 64, (p, n) at p = 1024 or None)
KN_SETTINGS = {
    "A1": ((200, 50), 1.0, (64, 16), (1024, 256)),
    "A2": ((200, 50), 1.0, (64, 64), (1024, 1024)),
    "A2prime": ((200, 50), 20.0, (64, 64), None),
    "B1": ((200, 50, 10, 5), 1.0, (64, 16), (1024, 256)),
    "B2": ((200, 50, 10, 5), 1.0, (64, 64), (1024, 1024)),
    "B2prime": ((200, 50, 10, 5), 2.0, (64, 64), None),
}


def kn_spike_spec(name: str) -> SpikeSpec:
    strengths, sigma2, _, _ = KN_SETTINGS[name]
    return SpikeSpec.from_alphas([factor_to_spike(a, sigma2) for a in strengths], sigma2)


def builtin_configs() -> list:
    configs = []
    for model, alphas in MODEL_SPIKES.items():
        for tag, sizes in SIZES.items():
            spec = SpikeSpec.from_alphas(alphas)
            configs.append(ExperimentConfig(f"{model}_{tag}", spec, sizes,
                                            description=f"{model}, known variance"))
            if model in ("model1", "model2"):
                configs.append(ExperimentConfig(f"{model}_{tag}_unknown", spec, sizes,
                                                estimator="gap_unknown",
                                                description=f"{model}, unknown variance, sigma2 = 1"))
                configs.append(ExperimentConfig(f"{model}_{tag}_s500", SpikeSpec.from_alphas(alphas, 500.0),
                                                sizes, estimator="gap_unknown",
                                                description=f"{model}, unknown variance, sigma2 = 500"))
    for (p, n), alphas in HARDING_SPIKES.items():
        configs.append(ExperimentConfig(f"harding_{p}_{n}", SpikeSpec.from_alphas(alphas), ((p, n),),
                                        estimator="gap_unknown",
                                        description="moment-matching comparison design; reference results used 5000 reps"))
    for name, (_, sigma2, small, large) in KN_SETTINGS.items():
        spec = kn_spike_spec(name)
        for suffix, size, reps in (("", small, DEFAULT_REPLICATIONS), ("_p1024", large, LARGE_KN_REPLICATIONS)):
            if size is None:
                continue
            configs.append(ExperimentConfig(f"{name}{suffix}", spec, (size,), reps,
                                            description=f"setting {name}, gap estimator, known variance"))
            configs.append(ExperimentConfig(f"{name}{suffix}_kn", spec, (size,), reps, estimator="kn",
                                            estimator_settings=KnSettings(sigma2=sigma2),
                                            description=f"setting {name}, KN test, known variance"))
    return configs


def get_config(model_id: str) -> ExperimentConfig:
    for config in builtin_configs():
        if config.model_id == model_id:
            return config
    raise ConfigurationError(f"no built-in experiment named {model_id!r}")


# ----------------------------------------------------------------------------
# config and result files

def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        spikes = data["spikes"]
        spec = SpikeSpec(tuple(tuple(s) for s in spikes.get("spikes", [])), float(spikes.get("sigma2", 1.0)))
        estimator = data.get("estimator", "gap_known")
        raw = dict(data.get("estimator_settings", {}))
        settings = KnSettings(**raw) if estimator == "kn" else GapEstimatorSettings(**raw)
        return ExperimentConfig(
            model_id=str(data["model_id"]),
            spikes=spec,
            sizes=tuple(tuple(s) for s in data["sizes"]),
            replications=int(data.get("replications", DEFAULT_REPLICATIONS)),
            estimator=estimator,
            estimator_settings=settings,
            noise_kind=data.get("noise_kind", "gaussian"),
            root_seed=int(data.get("root_seed", DEFAULT_ROOT_SEED)),
            description=data.get("description", ""),
        )
    except ConfigurationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid experiment config: {exc!r}") from exc


def load_config(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"cannot parse experiment config: {exc}") from exc
    return config_from_dict(data)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return repr(value)


def dump_config(config: ExperimentConfig) -> str:
    lines = [
        f"model_id = {_toml_value(config.model_id)}",
        f"description = {_toml_value(config.description)}",
        f"sizes = {_toml_value([list(s) for s in config.sizes])}",
        f"replications = {config.replications}",
        f"estimator = {_toml_value(config.estimator)}",
        f"noise_kind = {_toml_value(config.noise_kind)}",
        f"root_seed = {config.root_seed}",
        "",
        "[spikes]",
        f"spikes = {_toml_value([list(s) for s in config.spikes.spikes])}",
        f"sigma2 = {config.spikes.sigma2!r}",
        "",
        "[estimator_settings]",
    ]
    for key, value in vars(config.estimator_settings).items():
        if value is not None:
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


RESULT_COLUMNS = ["model_id", "p", "n", "c", "sigma2_true", "estimator", "replications", "root_seed",
                  "q0", "freq_correct", "mean_q", "mse_q", "mean_sigma2", "mse_sigma2"]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return value


def result_rows(config: ExperimentConfig, results: dict) -> list:
    rows = []
    for (p, n), stats in results.items():
        rows.append({
            "model_id": config.model_id, "p": p, "n": n, "c": p / n,
            "sigma2_true": config.spikes.sigma2, "estimator": config.estimator,
            "replications": stats.replications, "root_seed": config.root_seed, "q0": stats.q0_true,
            "freq_correct": stats.freq_correct, "mean_q": stats.mean_q, "mse_q": stats.mse_q,
            "mean_sigma2": stats.mean_sigma2, "mse_sigma2": stats.mse_sigma2,
            "counts": stats.counts,
        })
    return rows


def format_csv(rows: list, extra_columns=(), header_comment=None) -> str:
    """Render result rows; one ``count_k`` column per observed count value."""
    ks = sorted({k for row in rows for k in row["counts"]})
    columns = RESULT_COLUMNS + list(extra_columns) + [f"count_{k}" for k in ks]
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = [_fmt(row.get(col)) for col in RESULT_COLUMNS + list(extra_columns)]
        out += [row["counts"].get(k, 0) for k in ks]
        writer.writerow(out)
    return buf.getvalue()


def format_json(rows: list) -> str:
    payload = []
    for row in rows:
        item = {k: v for k, v in row.items() if k != "counts"}
        item["counts"] = {str(k): v for k, v in sorted(row["counts"].items())}
        payload.append(item)
    return json.dumps(payload, indent=2) + "\n"
