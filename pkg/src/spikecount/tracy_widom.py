"""Real (GOE, beta = 1) Tracy-Widom distribution.

Runtime lookups interpolate a shipped table of ``(x, F1(x))`` knots with a
monotone cubic. The table is produced offline by :func:`generate_table`
from :func:`tw1_cdf_fredholm`, a Nystrom discretisation of the Fredholm
determinant ``F1(s) = det(I - K)`` on ``L2(s, inf)`` with kernel
``K(x, y) = Ai((x + y) / 2) / 2``.

Regenerate with ``python -m spikecount.tracy_widom``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import airy

from .errors import ConfigurationError, DomainError

TABLE_RESOURCE = "tw1_table.csv"

_TABLE_X_MIN = -7.5
_TABLE_X_MAX = 8.0
_TABLE_STEP = 0.02
_ORACLE_NODES = 100
_ORACLE_LENGTH = 16.0


def tw1_cdf_fredholm(s: float, nodes: int = _ORACLE_NODES, length: float = _ORACLE_LENGTH) -> float:
    """High-accuracy F1(s) via Gauss-Legendre quadrature of the Fredholm determinant."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    upper = max(s, 0.0) + length
    x = s + (t + 1) * (upper - s) / 2
    w = w * (upper - s) / 2
    root_w = np.sqrt(w)
    kernel = 0.5 * airy((x[:, None] + x[None, :]) / 2)[0]
    value = np.linalg.det(np.eye(nodes) - root_w[:, None] * kernel * root_w[None, :])
    return float(min(max(value, 0.0), 1.0))


@dataclass(frozen=True)
class Tw1Table:
    x: np.ndarray
    F: np.ndarray
    source_tag: str

    def __post_init__(self):
        if self.x.shape != self.F.shape or self.x.ndim != 1 or self.x.size < 4:
            raise ConfigurationError("TW1 table needs matching 1-D knot arrays")
        if np.any(np.diff(self.x) <= 0) or np.any(np.diff(self.F) <= 0):
            raise ConfigurationError("TW1 table knots must be strictly increasing in x and F")
        if self.F[0] > 1e-6 or self.F[-1] < 1 - 1e-6:
            raise ConfigurationError("TW1 table must cover F in [1e-6, 1 - 1e-6]")


def generate_table(x_min=_TABLE_X_MIN, x_max=_TABLE_X_MAX, step=_TABLE_STEP,
                   nodes=_ORACLE_NODES, length=_ORACLE_LENGTH) -> Tw1Table:
    count = int(round((x_max - x_min) / step)) + 1
    x = np.round(x_min + step * np.arange(count), 10)
    F = np.array([tw1_cdf_fredholm(v, nodes, length) for v in x])
    tag = f"fredholm-gauss-legendre nodes={nodes} length={length} step={step}"
    return Tw1Table(x, F, tag)


def format_table(table: Tw1Table) -> str:
    lines = [f"# source_tag={table.source_tag}", "x,F"]
    lines += [f"{x:.2f},{F:.17e}" for x, F in zip(table.x, table.F)]
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> Tw1Table:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("# source_tag="):
        raise ConfigurationError("TW1 table must start with a '# source_tag=' header line")
    tag = lines[0][len("# source_tag="):].strip()
    if len(lines) < 2 or lines[1].strip() != "x,F":
        raise ConfigurationError("TW1 table second line must be the column header 'x,F'")
    xs, fs = [], []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        try:
            a, b = line.split(",")
            xs.append(float(a))
            fs.append(float(b))
        except ValueError:
            raise ConfigurationError(f"malformed TW1 table row at line {lineno}: {line!r}") from None
    return Tw1Table(np.array(xs), np.array(fs), tag)


@functools.lru_cache(maxsize=1)
def load_table() -> Tw1Table:
    try:
        text = resources.files("spikecount.data").joinpath(TABLE_RESOURCE).read_text()
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise ConfigurationError(f"TW1 table resource missing: {exc}") from exc
    return parse_table(text)


@functools.lru_cache(maxsize=1)
def _interpolants():
    table = load_table()
    return PchipInterpolator(table.x, table.F), PchipInterpolator(table.F, table.x)


def tw1_cdf(x: float) -> float:
    """F1(x); exactly 0 left of the table and 1 right of it."""
    table = load_table()
    if x < table.x[0]:
        return 0.0
    if x > table.x[-1]:
        return 1.0
    forward, _ = _interpolants()
    return float(min(max(forward(x), 0.0), 1.0))


def tw1_upper_quantile(gamma: float) -> float:
    """The ``s`` with ``F1(s) = 1 - gamma``."""
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    table = load_table()
    target = 1 - gamma
    if not table.F[0] <= target <= table.F[-1]:
        raise DomainError(f"gamma={gamma} is outside the tabulated range")
    _, inverse = _interpolants()
    return float(inverse(target))


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description="Regenerate the shipped TW1 table.")
    default = Path(__file__).with_name("data") / TABLE_RESOURCE
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args(argv)
    table = generate_table()
    args.out.write_text(format_table(table))
    print(f"wrote {table.x.size} knots to {args.out}")


if __name__ == "__main__":
    main()
