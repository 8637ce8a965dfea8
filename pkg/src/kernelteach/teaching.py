"""The teaching-set container: ordered labelled points with provenance tags."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_labels, require

__all__ = [
    "TeachingSet",
    "TAG_BASIS",
    "TAG_OPPOSITE_SUM",
    "TAG_ANCHOR",
    "TAG_BOUNDARY_POS",
    "TAG_BOUNDARY_NEG",
    "TAG_DATA",
]

TAG_BASIS = "basis"
TAG_OPPOSITE_SUM = "opposite_sum"
TAG_ANCHOR = "anchor"
TAG_BOUNDARY_POS = "boundary_pos"
TAG_BOUNDARY_NEG = "boundary_neg"
TAG_DATA = "data"

_TAGS = (TAG_BASIS, TAG_OPPOSITE_SUM, TAG_ANCHOR,
         TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG, TAG_DATA)


@dataclass(frozen=True)
class TeachingSet:
    """Ordered labelled points; ``tags`` records where each item came from.

    Boundary items come in duplicated pairs: a ``boundary_pos`` item always
    has a ``boundary_neg`` twin with the identical point, which forces any
    zero-loss hypothesis to vanish there.
    """

    points: np.ndarray
    labels: np.ndarray
    tags: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", as_matrix(self.points, "points"))
        object.__setattr__(self, "labels", check_labels(self.labels, "labels"))
        require(len(self.points) == len(self.labels) == len(self.tags),
                "points, labels and tags must have equal length")
        require(all(t in _TAGS for t in self.tags),
                f"tags must be drawn from {_TAGS}")
        self._check_pairs()

    def _check_pairs(self) -> None:
        pos = [i for i, t in enumerate(self.tags) if t == TAG_BOUNDARY_POS]
        neg = [i for i, t in enumerate(self.tags) if t == TAG_BOUNDARY_NEG]
        require(len(pos) == len(neg), "boundary items must come in +/- pairs")
        remaining = list(neg)
        for i in pos:
            twin = next((j for j in remaining
                         if np.array_equal(self.points[i], self.points[j])), None)
            require(twin is not None,
                    f"boundary_pos item {i} has no boundary_neg twin")
            remaining.remove(twin)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def boundary_points(self) -> np.ndarray:
        """The distinct boundary points, in order of first appearance."""
        rows = [self.points[i] for i, t in enumerate(self.tags)
                if t == TAG_BOUNDARY_POS]
        if not rows:
            return np.empty((0, self.d))
        return np.array(rows)

    def anchor_index(self) -> int:
        """Index of the unique positively-labelled anchor item."""
        idx = [i for i, t in enumerate(self.tags)
               if t == TAG_ANCHOR and self.labels[i] == 1]
        require(len(idx) == 1, "teaching set does not have a unique positive anchor")
        return idx[0]

    def centers(self) -> np.ndarray:
        """Distinct points in order of first appearance.

        For constructed sets this is (z_1, ..., z_{r-1}, a): boundary pairs
        collapse to one center each and the anchor comes last.
        """
        kept: list[np.ndarray] = []
        for row in self.points:
            if not any(np.array_equal(row, k) for k in kept):
                kept.append(row)
        return np.array(kept)

    def to_rows(self) -> list[tuple]:
        return [(tuple(self.points[i]), int(self.labels[i]), self.tags[i])
                for i in range(len(self))]
