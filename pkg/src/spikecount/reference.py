"""Reference simulation results used as targets by ``spikecount tables``.

Each table maps to rows ``(config_id, p, n, targets)``; ``BANDS`` holds the
half-width of the pass band for every checked metric. Metrics without a band
(for instance ``mse_q``) are reported but never graded.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TargetRow:
    config_id: str
    p: int
    n: int
    targets: dict


def _rows(config_id, sizes, **columns):
    out = []
    for i, (p, n) in enumerate(sizes):
        out.append(TargetRow(config_id, p, n, {k: v[i] for k, v in columns.items() if v[i] is not None}))
    return out


C03 = [(30, 100), (60, 200), (120, 400), (240, 800)]
C06 = [(60, 100), (120, 200), (240, 400), (480, 800)]

TABLES = {
    "t1": _rows("model1_c03", C03,
                freq_correct=[0.883, 0.910, 0.921, 0.931],
                mean_q=[5.057, 5.081, 5.079, 5.069],
                mse_q=[0.212, 0.107, 0.073, 0.064]),
    "t2": _rows("model1_c06", C06,
                freq_correct=[0.914, 0.910, 0.924, 0.929],
                mean_q=[5.056, 5.080, 5.072, 5.072],
                mse_q=[0.139, 0.098, 0.079, 0.069]),
    "t3": _rows("model2_c03", C03,
                freq_correct=[0.778, 0.857, 0.902, 0.924],
                mean_q=[3.718, 3.925, 4.005, 4.062],
                mse_q=[1.086, 0.582, 0.331, 0.110])
    + _rows("model2_c06", C06,
            freq_correct=[0.734, 0.853, 0.893, 0.934],
            mean_q=[3.478, 3.818, 3.969, 4.051],
            mse_q=[1.655, 0.823, 0.394, 0.108]),
    "t4t5": _rows("model1_c03_unknown", C03,
                  freq_correct=[0.849, 0.890, 0.927, 0.916],
                  mean_q=[5.052, 5.108, 5.069, 5.084],
                  mse_q=[0.338, 0.112, 0.076, 0.077],
                  mean_sigma2=[0.955, 0.970, 0.986, 0.993],
                  mse_sigma2=[0.015, 0.0, 0.0, 0.0])
    + _rows("model1_c06_unknown", C06,
            freq_correct=[0.865, 0.902, 0.930, 0.933],
            mean_q=[5.087, 5.095, 5.070, 5.067],
            mse_q=[0.236, 0.092, 0.065, 0.063],
            mean_sigma2=[0.943, 0.971, 0.985, 0.993],
            mse_sigma2=[0.003, 0.0, 0.0, 0.0]),
    "t6": _rows("model2_c03_unknown", C03,
                freq_correct=[0.658, 0.805, 0.878, 0.907],
                mean_q=[3.362, 3.806, 3.983, 4.071],
                mse_q=[2.019, 1.023, 0.483, 0.144],
                mean_sigma2=[1.052, 0.994, 0.991, 0.994],
                mse_sigma2=[0.043, 0.005, 0.001, 0.0])
    + _rows("model2_c06_unknown", C06,
            freq_correct=[0.674, 0.806, 0.892, 0.926],
            mean_q=[3.367, 3.781, 3.965, 4.052],
            mse_q=[1.898, 1.040, 0.472, 0.125],
            mean_sigma2=[1.003, 0.986, 0.990, 0.994],
            mse_sigma2=[0.012, 0.002, 0.0, 0.0]),
    "t7": _rows("model1_c03_s500", C03,
                freq_correct=[0.823, 0.904, 0.918, 0.914],
                mean_sigma2=[474.909, 485.019, 492.608, 496.316],
                mse_sigma2=[3281.714, 99.558, 21.244, 3.519])
    + _rows("model1_c06_s500", C06,
            freq_correct=[0.870, 0.898, 0.928, 0.933],
            mean_sigma2=[472.816, 485.490, 492.699, 496.377],
            mse_sigma2=[688.994, 55.489, 7.242, 1.654]),
    "t8": _rows("model2_c03_s500", C03,
                freq_correct=[0.649, 0.794, 0.880, 0.918],
                mean_sigma2=[528.651, 498.032, 494.613, 496.813],
                mse_sigma2=[11223.872, 1478.184, 107.355, 8.770])
    + _rows("model2_c06_s500", C06,
            freq_correct=[0.687, 0.809, 0.900, 0.941],
            mean_sigma2=[501.754, 493.687, 494.445, 496.836],
            mse_sigma2=[3126.083, 438.063, 39.686, 3.576]),
    "t9_ours": [
        TargetRow("harding_30_100", 30, 100, dict(mean_q=5.087, mse_q=0.266, mean_sigma2=0.946, mse_sigma2=0.008)),
        TargetRow("harding_90_100", 90, 100, dict(mean_q=5.049, mse_q=0.232, mean_sigma2=0.943, mse_sigma2=0.0)),
        TargetRow("harding_210_300", 210, 300, dict(mean_q=5.087, mse_q=0.082, mean_sigma2=0.980, mse_sigma2=0.0)),
        TargetRow("harding_250_500", 250, 500, dict(mean_q=5.077, mse_q=0.072, mean_sigma2=0.988, mse_sigma2=0.0)),
    ],
    "t10": [
        TargetRow("A1", 64, 16, dict(freq_correct=0.943)),
        TargetRow("A1_kn", 64, 16, dict(freq_correct=0.994)),
        TargetRow("A2", 64, 64, dict(freq_correct=0.966)),
        TargetRow("A2_kn", 64, 64, dict(freq_correct=0.993)),
        TargetRow("A2prime", 64, 64, dict(freq_correct=0.602)),
        TargetRow("A2prime_kn", 64, 64, dict(freq_correct=0.513)),
        TargetRow("B1", 64, 16, dict(freq_correct=0.348)),
        TargetRow("B1_kn", 64, 16, dict(freq_correct=0.238)),
        TargetRow("B2", 64, 64, dict(freq_correct=0.947)),
        TargetRow("B2_kn", 64, 64, dict(freq_correct=0.995)),
        TargetRow("B2prime", 64, 64, dict(freq_correct=0.734)),
        TargetRow("B2prime_kn", 64, 64, dict(freq_correct=0.682)),
    ],
    "t11": [
        TargetRow("A1_p1024", 1024, 256, dict(freq_correct=0.995)),
        TargetRow("A1_p1024_kn", 1024, 256, dict(freq_correct=0.994)),
        TargetRow("A2_p1024", 1024, 1024, dict(freq_correct=0.986)),
        TargetRow("A2_p1024_kn", 1024, 1024, dict(freq_correct=0.993)),
        TargetRow("B1_p1024", 1024, 256, dict(freq_correct=0.999)),
        TargetRow("B1_p1024_kn", 1024, 256, dict(freq_correct=0.999)),
        TargetRow("B2_p1024", 1024, 1024, dict(freq_correct=0.986)),
        TargetRow("B2_p1024_kn", 1024, 1024, dict(freq_correct=0.994)),
    ],
    "t12": _rows("model3_c03", C03,
                 mean_q=[6.085, 6.077, 6.088, 6.073], mse_q=[0.168, 0.121, 0.082, 0.068])
    + _rows("model3_c06", C06,
            mean_q=[6.043, 6.092, 6.081, 6.079], mse_q=[0.151, 0.108, 0.074, 0.073])
    + _rows("model4_c03", C03,
            mean_q=[4.529, 4.860, 5.310, 5.597], mse_q=[4.393, 4.199, 3.061, 2.051])
    + _rows("model4_c06", C06,
            mean_q=[4.118, 4.614, 5.159, 5.562], mse_q=[4.797, 4.453, 3.447, 2.058]),
}

_FREQ = 0.03
_FREQ_DESK = 0.05

BANDS = {
    "t1": dict(freq_correct=_FREQ, mean_q=0.05),
    "t2": dict(freq_correct=_FREQ, mean_q=0.05),
    "t3": dict(freq_correct=0.04),
    "t4t5": dict(freq_correct=_FREQ, mean_sigma2=0.005),
    "t6": dict(freq_correct=_FREQ, mean_sigma2=0.005),
    "t7": dict(freq_correct=_FREQ, mean_sigma2=2.0),
    "t8": dict(freq_correct=_FREQ, mean_sigma2=2.0),
    "t9_ours": dict(mean_q=0.08, mean_sigma2=0.01),
    "t10": dict(freq_correct=0.04),
    "t11": dict(freq_correct=_FREQ_DESK),
    "t12": dict(mean_q=0.1),
}

# per-row overrides of the table-wide bands
ROW_BANDS = {
    ("t10", "A1_kn"): dict(freq_correct=0.02),
    ("t10", "B1"): dict(freq_correct=0.06),
    ("t10", "B1_kn"): dict(freq_correct=0.06),
}

TABLE_IDS = tuple(TABLES)


def bands_for(table_id: str, config_id: str, replications: int) -> dict:
    bands = dict(BANDS[table_id])
    bands.update(ROW_BANDS.get((table_id, config_id), {}))
    if replications <= 200 and "freq_correct" in bands:
        bands["freq_correct"] = max(bands["freq_correct"], _FREQ_DESK)
    return bands


def config_ids(table_id: str) -> list:
    seen = []
    for row in TABLES[table_id]:
        if row.config_id not in seen:
            seen.append(row.config_id)
    return seen
