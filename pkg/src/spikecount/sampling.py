"""Seeded sampling from the spiked model and sample-covariance spectra.

Replication ``r`` of an experiment with root seed ``s`` draws from a Philox
generator keyed by ``s`` with its counter offset by ``r``, so every
replication can be regenerated on its own and in any order.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import ortho_group

from .errors import ConfigurationError, InputError, NumericalError
from .model import AspectRatio, SpikeSpec

NOISE_KINDS = ("gaussian", "symmetric_heavy")

_NEG_FLOOR = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Sample eigenvalues sorted in non-increasing order."""

    values: np.ndarray
    p: int
    n: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size != self.p:
            raise InputError(f"spectrum must hold p={self.p} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("spectrum contains non-finite values")
        if np.any(np.diff(values) > 0):
            raise InputError("spectrum must be sorted in non-increasing order")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.p

    def scaled(self, t: float) -> "Spectrum":
        return Spectrum(self.values * t, self.p, self.n)


@dataclass(frozen=True)
class SampleSeed:
    root_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= self.root_seed < 2**64:
            raise ConfigurationError(f"root seed must be a 64-bit unsigned integer, got {self.root_seed}")
        if self.replication_index < 0:
            raise ConfigurationError("replication index must be nonnegative")

    def generator(self) -> np.random.Generator:
        # counter word 2 carries the replication; words 0-1 advance within a draw
        bitgen = np.random.Philox(key=self.root_seed, counter=[0, 0, self.replication_index, 0])
        return np.random.Generator(bitgen)


def _noise(rng: np.random.Generator, shape, noise_kind: str) -> np.ndarray:
    if noise_kind == "gaussian":
        return rng.standard_normal(shape)
    if noise_kind == "symmetric_heavy":
        # Laplace with unit variance: symmetric, sub-exponential tails
        return rng.laplace(0.0, 1 / math.sqrt(2), shape)
    raise ConfigurationError(f"unknown noise kind {noise_kind!r}; expected one of {NOISE_KINDS}")


def sample_data(spec: SpikeSpec, ratio: AspectRatio, seed: SampleSeed,
                noise_kind: str = "gaussian", rotate: bool = False) -> np.ndarray:
    """Draw an ``n x p`` data matrix whose rows have covariance ``diag(spec)``."""
    p, n = ratio.p, ratio.n
    if p < spec.q0 + 2:
        raise ConfigurationError(f"p={p} leaves no bulk gap for q0={spec.q0}; need p >= q0 + 2")
    if n < 2:
        raise ConfigurationError(f"need n >= 2 samples, got {n}")
    rng = seed.generator()
    scale = np.sqrt(np.asarray(spec.population_eigenvalues(p)))
    x = _noise(rng, (n, p), noise_kind) * scale
    if rotate:
        x = x @ ortho_group.rvs(p, random_state=rng).T
    return x


def sample_spectrum(spec: SpikeSpec, ratio: AspectRatio, seed: SampleSeed,
                    noise_kind: str = "gaussian", rotate: bool = False) -> Spectrum:
    return spectrum_from_data(sample_data(spec, ratio, seed, noise_kind, rotate))


def spectrum_from_data(data) -> Spectrum:
    """Eigenvalues of ``X.T @ X / n`` for an ``n x p`` matrix, without centering.

    When ``p > n`` the ``n x n`` Gram matrix is diagonalised instead and the
    spectrum is padded with ``p - n`` exact zeros.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or 0 in x.shape:
        raise InputError(f"data must be a non-empty 2-D matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("data contains non-finite entries")
    n, p = x.shape
    if p > n:
        ev = np.linalg.eigvalsh(x @ x.T / n)
    else:
        ev = np.linalg.eigvalsh(x.T @ x / n)
    ev = ev[::-1]
    top = ev[0] if ev.size else 0.0
    ev = np.where((ev < 0) & (ev >= -_NEG_FLOOR * max(top, 0.0)), 0.0, ev)
    if np.any(ev < 0):
        raise NumericalError(f"eigensolver returned a negative eigenvalue {ev.min():.3e}")
    if p > n:
        ev = np.concatenate([ev, np.zeros(p - n)])
    return Spectrum(ev, p, n)


_SPLIT = re.compile(r"[,\s]+")


def parse_matrix(text: str) -> np.ndarray:
    """Parse whitespace- or comma-separated rows of decimal reals.

    Blank lines and lines starting with ``#`` are skipped.
    """
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = [t for t in _SPLIT.split(stripped) if t]
        row = []
        for col, tok in enumerate(tokens, start=1):
            try:
                value = float(tok)
            except ValueError:
                raise InputError(f"cannot parse {tok!r} as a real number", lineno, col) from None
            if not math.isfinite(value):
                raise InputError(f"non-finite entry {tok!r}", lineno, col)
            row.append(value)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"expected {width} columns, found {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise InputError("no data rows found")
    return np.array(rows, dtype=float)


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def parse_spectrum(text: str) -> Spectrum:
    """Parse the spectrum CSV: ``p,<int>`` and ``n,<int>`` header rows, then one value per row."""
    lines = text.splitlines()
    header = {}
    body_start = None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if len(header) < 2:
            key, _, value = stripped.partition(",")
            key = key.strip().lower()
            if key not in ("p", "n") or key in header:
                raise InputError(f"expected header row 'p,<int>' or 'n,<int>', got {stripped!r}", lineno, 1)
            try:
                header[key] = int(value)
            except ValueError:
                raise InputError(f"header value {value!r} is not an integer", lineno, 2) from None
            continue
        body_start = lineno
        break
    if len(header) < 2:
        raise InputError("spectrum file needs 'p' and 'n' header rows")
    values = []
    if body_start is not None:
        for lineno in range(body_start, len(lines) + 1):
            stripped = lines[lineno - 1].strip()
            if not stripped:
                continue
            try:
                value = float(stripped)
            except ValueError:
                raise InputError(f"cannot parse {stripped!r} as a real number", lineno, 1) from None
            if not math.isfinite(value):
                raise InputError(f"non-finite value {stripped!r}", lineno, 1)
            values.append(value)
    if len(values) != header["p"]:
        raise InputError(f"header declares p={header['p']} but {len(values)} values follow")
    if header["n"] < 1:
        raise InputError(f"n must be positive, got {header['n']}")
    if any(b > a for a, b in zip(values, values[1:])):
        raise InputError("spectrum values must be in non-increasing order")
    return Spectrum(np.array(values), header["p"], header["n"])


def read_spectrum(path) -> Spectrum:
    return parse_spectrum(Path(path).read_text())


def format_spectrum(spectrum: Spectrum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", spectrum.p])
    writer.writerow(["n", spectrum.n])
    for v in spectrum.values:
        writer.writerow([repr(float(v))])
    return buf.getvalue()


def write_spectrum(spectrum: Spectrum, path) -> None:
    Path(path).write_text(format_spectrum(spectrum))
