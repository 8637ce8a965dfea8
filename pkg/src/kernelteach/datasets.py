"""Synthetic dataset generators, CSV I/O, and reference-model training.

All generators are closed-form and deterministic given their seed: moons
(two interleaving half-circle arcs), circles (two concentric radii), banana
(two crossing parabolic lobes, not separable once jittered), blobs (two
disjoint uniform disks) and linear_margin (halfspace labels with a margin
band removed).  Class counts are balanced to within one point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_labels, require
from .kernels import GAUSSIAN, KernelSpec
from .learner import DualModel, FitNotConverged, LearnerConfig, fit
from .teaching import TAG_DATA, TeachingSet

__all__ = [
    "Dataset",
    "CsvFormatError",
    "generate",
    "train_reference",
    "ReferenceFit",
    "load_csv",
    "save_csv",
    "GENERATOR_KINDS",
]

GENERATOR_KINDS = ("moons", "circles", "banana", "blobs", "linear_margin")

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Dataset:
    """Labelled points of a common dimension with -1/+1 labels."""

    points: np.ndarray
    labels: np.ndarray
    name: str = ""
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "points", as_matrix(self.points, "points"))
        object.__setattr__(self, "labels", check_labels(self.labels, "labels"))
        require(len(self.points) == len(self.labels),
                "points and labels must have equal length")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def as_teaching_set(self) -> TeachingSet:
        return TeachingSet(self.points, self.labels, (TAG_DATA,) * len(self))


class CsvFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def _split_counts(n: int) -> tuple[int, int]:
    return n - n // 2, n // 2


def _moons(rng, n, noise):
    n_pos, n_neg = _split_counts(n)
    t1 = rng.uniform(0.0, math.pi, n_pos)
    upper = np.column_stack([np.cos(t1) - 0.5, np.sin(t1) - 0.25])
    t2 = rng.uniform(0.0, math.pi, n_neg)
    lower = np.column_stack([0.5 - np.cos(t2), 0.25 - np.sin(t2)])
    X = np.vstack([upper, lower])
    y = np.concatenate([np.ones(n_pos, int), -np.ones(n_neg, int)])
    return X + rng.normal(0.0, noise, X.shape), y


def _circles(rng, n, noise):
    # outer circle positive: an unbounded positive region leaves room for
    # anchors with small kernel leakage against the boundary; the radii are
    # sized so the class boundary is long enough on the kernel scale
    n_pos, n_neg = _split_counts(n)
    t1 = rng.uniform(0.0, 2 * math.pi, n_pos)
    outer = 1.4 * np.column_stack([np.cos(t1), np.sin(t1)])
    t2 = rng.uniform(0.0, 2 * math.pi, n_neg)
    inner = 0.7 * np.column_stack([np.cos(t2), np.sin(t2)])
    X = np.vstack([outer, inner])
    y = np.concatenate([np.ones(n_pos, int), -np.ones(n_neg, int)])
    return X + rng.normal(0.0, noise, X.shape), y


def _banana(rng, n, noise):
    n_pos, n_neg = _split_counts(n)
    t1 = rng.uniform(-1.4, 1.4, n_pos)
    up = np.column_stack([t1, t1 ** 2 - 1.0])
    t2 = rng.uniform(-1.4, 1.4, n_neg)
    down = np.column_stack([t2, 1.0 - t2 ** 2])
    X = np.vstack([up, down])
    y = np.concatenate([np.ones(n_pos, int), -np.ones(n_neg, int)])
    return X + rng.normal(0.0, noise, X.shape), y


def _blobs(rng, n, noise):
    # two disjoint uniform disks far apart: separable with a wide margin,
    # and the trained separator keeps a small amplitude between them
    n_pos, n_neg = _split_counts(n)
    disks = {1: (np.array([3.0, 0.0]), 0.5), -1: (np.array([-3.0, 0.0]), 0.5)}
    rows, labels = [], []
    for label, count in ((1, n_pos), (-1, n_neg)):
        center, radius = disks[label]
        g = rng.standard_normal((count, 2))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        radii = radius * np.sqrt(rng.random(count))
        jitter = rng.uniform(-noise, noise, (count, 2)) if noise > 0 else 0.0
        rows.append(center + radii[:, None] * g + jitter)
        labels.append(label * np.ones(count, int))
    return np.vstack(rows), np.concatenate(labels)


def _linear_margin(rng, n, noise):
    margin = 0.25
    w = rng.standard_normal(2)
    w /= np.linalg.norm(w)
    n_pos, n_neg = _split_counts(n)
    rows, labels = [], []
    for sign, count in ((1, n_pos), (-1, n_neg)):
        found = 0
        while found < count:
            X = rng.uniform(-1.0 - noise, 1.0 + noise, (4 * count, 2))
            keep = X[sign * (X @ w) >= margin]
            take = keep[:count - found]
            rows.append(take)
            labels.append(sign * np.ones(len(take), int))
            found += len(take)
    return np.vstack(rows), np.concatenate(labels)


_GENERATORS = {
    "moons": _moons,
    "circles": _circles,
    "banana": _banana,
    "blobs": _blobs,
    "linear_margin": _linear_margin,
}


def generate(kind: str, n: int, noise: float, seed: int) -> Dataset:
    """Generate a balanced two-class dataset; deterministic given the seed."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown dataset kind {kind!r}; choose from {GENERATOR_KINDS}")
    require(n >= 2, "n must be >= 2")
    require(noise >= 0, "noise must be >= 0")
    rng = np.random.default_rng(seed)
    X, y = _GENERATORS[kind](rng, n, float(noise))
    return Dataset(points=X, labels=y, name=kind, seed=seed)


class ReferenceFit:
    """A trained reference separator with its empirical risk."""

    def __init__(self, model: DualModel, err_star: float, converged: bool):
        self.model = model
        self.err_star = err_star
        self.converged = converged


def train_reference(dataset: Dataset, spec: KernelSpec,
                    config: LearnerConfig | None = None) -> ReferenceFit:
    """Fit the reference separator over all dataset inputs as centers.

    Non-separable data cannot reach zero training loss; the best model found
    is accepted in that case and the residual risk is recorded.
    """
    require(spec.family == GAUSSIAN, "reference training expects a Gaussian kernel")
    require(len(dataset) >= 1, "dataset must be non-empty")
    ts = dataset.as_teaching_set()
    try:
        model = fit(ts, spec, config)
        converged = True
    except FitNotConverged as exc:
        model = exc.model
        converged = False
    margins = dataset.labels * model.decision_values(dataset.points)
    err = float(np.mean(np.maximum(-margins, 0.0)))
    return ReferenceFit(model=model, err_star=err, converged=converged)


def save_csv(dataset: Dataset, path) -> None:
    """Write ``x1,...,xd,y`` rows with 17-significant-digit coordinates."""
    header = ",".join([f"x{i + 1}" for i in range(dataset.d)] + ["y"])
    lines = [header]
    for row, label in zip(dataset.points, dataset.labels):
        coords = ",".join(FLOAT_FMT % v for v in row)
        lines.append(f"{coords},{label:d}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> Dataset:
    """Read a dataset written by ``save_csv`` (or any x1..xd,y CSV).

    A 0/1 label column is detected and mapped to -1/+1 (0 becomes -1); any
    other label value is rejected with its line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    require(len(lines) >= 1, "empty CSV file")
    header = [c.strip() for c in lines[0].split(",")]
    d = len(header) - 1
    expected = [f"x{i + 1}" for i in range(d)] + ["y"]
    if d < 1 or header != expected:
        raise CsvFormatError(1, f"expected header {','.join(expected) if d >= 1 else 'x1,...,y'},"
                                f" got {lines[0]!r}")
    rows, labels, line_nos = [], [], []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != d + 1:
            raise CsvFormatError(line_no, f"expected {d + 1} fields, got {len(cells)}")
        try:
            coords = [float(c) for c in cells[:d]]
            label = float(cells[d])
        except ValueError as exc:
            raise CsvFormatError(line_no, str(exc)) from None
        if not label.is_integer() or int(label) not in (-1, 0, 1):
            raise CsvFormatError(line_no, f"label must be -1, 0 or 1, got {cells[d]!r}")
        rows.append(coords)
        labels.append(int(label))
        line_nos.append(line_no)
    require(len(rows) >= 1, "CSV contains no data rows")
    values = set(labels)
    if 0 in values:
        if not values <= {0, 1}:
            bad = next(i for i, lab in enumerate(labels) if lab not in (0, 1))
            raise CsvFormatError(line_nos[bad], "labels mix 0/1 and -1/+1 conventions")
        labels = [1 if lab == 1 else -1 for lab in labels]
    return Dataset(points=np.array(rows), labels=np.array(labels))
