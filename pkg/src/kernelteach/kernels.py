"""Kernel evaluations, explicit feature maps, and truncation-order selection.

Four kernel families are supported: linear, homogeneous polynomial of degree
``k``, Gaussian with bandwidth ``sigma``, and the order-``s`` Taylor
truncation of the Gaussian.  The polynomial and truncated-Gaussian families
have explicit finite-dimensional feature maps laid out in graded multi-index
order, so truncating a feature vector to a coordinate prefix is the same as
lowering the truncation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import as_matrix, as_vector, check_same_dim, require

__all__ = [
    "KernelSpec",
    "MultiIndex",
    "FeatureVector",
    "ApproxConfig",
    "InfiniteDimensionError",
    "eval_kernel",
    "kernel_matrix",
    "feature_dim",
    "multi_indices",
    "poly_feature_map",
    "poly_features",
    "truncated_gaussian_feature_map",
    "truncated_gaussian_features",
    "feature_map",
    "features",
    "choose_truncation",
    "taylor_tail_bound",
]

LINEAR = "linear"
POLYNOMIAL = "polynomial"
GAUSSIAN = "gaussian"
TRUNCATED_GAUSSIAN = "truncated_gaussian"

_FAMILIES = (LINEAR, POLYNOMIAL, GAUSSIAN, TRUNCATED_GAUSSIAN)


class InfiniteDimensionError(ValueError):
    """Raised when a finite feature dimension is requested for the Gaussian kernel."""


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel family to use and its parameters.

    ``degree`` applies to the polynomial family, ``sigma`` to both Gaussian
    families, and ``truncation`` to the truncated Gaussian only.
    """

    family: str
    degree: int | None = None
    sigma: float | None = None
    truncation: int | None = None

    def __post_init__(self):
        require(self.family in _FAMILIES, f"unknown kernel family {self.family!r}")
        if self.family == POLYNOMIAL:
            require(self.degree is not None and int(self.degree) >= 1,
                    "polynomial kernel needs degree k >= 1")
            object.__setattr__(self, "degree", int(self.degree))
        if self.family in (GAUSSIAN, TRUNCATED_GAUSSIAN):
            require(self.sigma is not None and float(self.sigma) > 0,
                    "Gaussian kernels need sigma > 0")
            object.__setattr__(self, "sigma", float(self.sigma))
        if self.family == TRUNCATED_GAUSSIAN:
            require(self.truncation is not None and int(self.truncation) >= 0,
                    "truncated Gaussian needs truncation order s >= 0")
            object.__setattr__(self, "truncation", int(self.truncation))

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR)

    @classmethod
    def polynomial(cls, degree: int) -> "KernelSpec":
        return cls(POLYNOMIAL, degree=degree)

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(GAUSSIAN, sigma=sigma)

    @classmethod
    def truncated_gaussian(cls, sigma: float, truncation: int) -> "KernelSpec":
        return cls(TRUNCATED_GAUSSIAN, sigma=sigma, truncation=truncation)


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of a monomial; ``order`` is the total degree."""

    entries: tuple[int, ...]

    def __post_init__(self):
        require(all(isinstance(e, int) and e >= 0 for e in self.entries),
                "multi-index entries must be non-negative integers")

    @property
    def order(self) -> int:
        return sum(self.entries)

    def log_multinomial(self) -> float:
        """log of order! / prod(entries!)."""
        k = self.order
        return math.lgamma(k + 1) - sum(math.lgamma(e + 1) for e in self.entries)


@dataclass(frozen=True)
class FeatureVector:
    """Dense feature coordinates plus the (order, multi-index) at each position.

    The layout is graded: all order-0 coordinates first, then order-1, and so
    on; within a grade, multi-indices are sorted lexicographically descending.
    The layout is deterministic, so truncating to a coordinate prefix keeps
    the meaning of every retained coordinate.
    """

    coords: np.ndarray
    index_map: tuple[tuple[int, tuple[int, ...]], ...] = field(repr=False)

    def __post_init__(self):
        require(len(self.coords) == len(self.index_map),
                "coords and index_map must have equal length")

    def __len__(self) -> int:
        return len(self.coords)

    def dot(self, other: "FeatureVector") -> float:
        require(len(self) == len(other), "feature vectors have different layouts")
        return float(self.coords @ other.coords)


# ---------------------------------------------------------------------------
# multi-index enumeration and cached layouts
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _index_tuples(d: int, order: int) -> tuple[tuple[int, ...], ...]:
    if d == 1:
        return ((order,),)
    out = []
    for first in range(order, -1, -1):
        for rest in _index_tuples(d - 1, order - first):
            out.append((first,) + rest)
    return tuple(out)


def multi_indices(d: int, order: int) -> list[MultiIndex]:
    """All multi-indices of the given total order, lexicographically descending."""
    require(d >= 1, "d must be >= 1")
    require(order >= 0, "order must be >= 0")
    return [MultiIndex(t) for t in _index_tuples(d, order)]


@lru_cache(maxsize=None)
def _graded_layout(d: int, s: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """(order, multi-index) for every coordinate of the order-<=s layout."""
    out = []
    for k in range(s + 1):
        out.extend((k, t) for t in _index_tuples(d, k))
    return tuple(out)


@lru_cache(maxsize=None)
def _grade_layout(d: int, k: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    return tuple((k, t) for t in _index_tuples(d, k))


@lru_cache(maxsize=None)
def _poly_weights(d: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponent matrix and sqrt-multinomial weights for the degree-k map."""
    idx = _index_tuples(d, k)
    expo = np.array(idx, dtype=np.float64)
    logs = np.array([MultiIndex(t).log_multinomial() for t in idx])
    weights = np.exp(0.5 * logs)
    expo.setflags(write=False)
    weights.setflags(write=False)
    return expo, weights


@lru_cache(maxsize=None)
def _trunc_weights(d: int, s: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponent matrix and per-coordinate weights for the order-s truncated map.

    The weight of coordinate (k, lam) is 1 / (sigma^k * sqrt(prod(lam_i!))),
    computed in log-space so large orders do not overflow.
    """
    expos = []
    logs = []
    for k in range(s + 1):
        for t in _index_tuples(d, k):
            expos.append(t)
            logs.append(-k * math.log(sigma) - 0.5 * sum(math.lgamma(e + 1) for e in t))
    expo = np.array(expos, dtype=np.float64)
    weights = np.exp(np.array(logs))
    expo.setflags(write=False)
    weights.setflags(write=False)
    return expo, weights


# ---------------------------------------------------------------------------
# kernel evaluation
# ---------------------------------------------------------------------------

def _truncated_series(z: np.ndarray, s: int) -> np.ndarray:
    """sum_{j=0}^{s} z^j / j!, evaluated with a running term for stability."""
    total = np.ones_like(z)
    term = np.ones_like(z)
    for j in range(1, s + 1):
        term = term * z / j
        total = total + term
    return total


def eval_kernel(spec: KernelSpec, x, x2) -> float:
    """Evaluate K(x, x2) for the given kernel family."""
    xv = as_vector(x, "x")
    xv2 = as_vector(x2, "x2")
    check_same_dim(xv, xv2)
    return float(kernel_matrix(spec, xv[None, :], xv2[None, :])[0, 0])


def kernel_matrix(spec: KernelSpec, A, B) -> np.ndarray:
    """Cross-kernel matrix with entries K(A[i], B[j])."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    check_same_dim(A, B, "A", "B")
    inner = A @ B.T
    if spec.family == LINEAR:
        return inner
    if spec.family == POLYNOMIAL:
        return inner ** spec.degree
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    s2 = spec.sigma ** 2
    if spec.family == GAUSSIAN:
        d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * inner
        return np.exp(-np.maximum(d2, 0.0) / (2.0 * s2))
    pref = np.exp(-sq_a / (2.0 * s2))[:, None] * np.exp(-sq_b / (2.0 * s2))[None, :]
    return pref * _truncated_series(inner / s2, spec.truncation)


def feature_dim(spec: KernelSpec, d: int) -> int:
    """Dimension of the explicit feature map for inputs in R^d."""
    require(d >= 1, "d must be >= 1")
    if spec.family == LINEAR:
        return d
    if spec.family == POLYNOMIAL:
        return math.comb(d + spec.degree - 1, spec.degree)
    if spec.family == TRUNCATED_GAUSSIAN:
        return math.comb(d + spec.truncation, spec.truncation)
    raise InfiniteDimensionError("the Gaussian kernel is infinite-dimensional")


# ---------------------------------------------------------------------------
# explicit feature maps
# ---------------------------------------------------------------------------

def poly_features(d: int, k: int, X) -> np.ndarray:
    """Batch degree-k polynomial features: rows are sqrt(k!/prod(lam!)) * x^lam."""
    X = as_matrix(X, "X")
    require(X.shape[1] == d, f"points have dimension {X.shape[1]}, expected {d}")
    require(k >= 1, "k must be >= 1")
    expo, weights = _poly_weights(d, k)
    mono = np.prod(X[:, None, :] ** expo[None, :, :], axis=2)
    return mono * weights[None, :]


def poly_feature_map(d: int, k: int, x) -> FeatureVector:
    """Explicit feature map of the degree-k homogeneous polynomial kernel."""
    xv = as_vector(x, "x")
    coords = poly_features(d, k, xv[None, :])[0]
    return FeatureVector(coords, _grade_layout(d, k))


def truncated_gaussian_features(d: int, sigma: float, s: int, X) -> np.ndarray:
    """Batch order-s truncated Gaussian features in graded layout."""
    X = as_matrix(X, "X")
    require(X.shape[1] == d, f"points have dimension {X.shape[1]}, expected {d}")
    require(sigma > 0, "sigma must be > 0")
    require(s >= 0, "s must be >= 0")
    expo, weights = _trunc_weights(d, s, float(sigma))
    mono = np.prod(X[:, None, :] ** expo[None, :, :], axis=2)
    pref = np.exp(-np.einsum("ij,ij->i", X, X) / (2.0 * sigma ** 2))
    return pref[:, None] * mono * weights[None, :]


def truncated_gaussian_feature_map(d: int, sigma: float, s: int, x) -> FeatureVector:
    """Explicit feature map of the order-s Taylor truncation of the Gaussian kernel.

    Coordinate (k, lam) equals exp(-|x|^2 / 2 sigma^2) * x^lam / (sigma^k
    sqrt(prod(lam_i!))); the pairwise inner products reproduce the truncated
    kernel exactly, and every feature vector has norm at most 1.
    """
    xv = as_vector(x, "x")
    coords = truncated_gaussian_features(d, sigma, s, xv[None, :])[0]
    return FeatureVector(coords, _graded_layout(d, s))


def features(spec: KernelSpec, d: int, X) -> np.ndarray:
    """Batch features for any finite-dimensional kernel family."""
    if spec.family == LINEAR:
        X = as_matrix(X, "X")
        require(X.shape[1] == d, f"points have dimension {X.shape[1]}, expected {d}")
        return X
    if spec.family == POLYNOMIAL:
        return poly_features(d, spec.degree, X)
    if spec.family == TRUNCATED_GAUSSIAN:
        return truncated_gaussian_features(d, spec.sigma, spec.truncation, X)
    raise InfiniteDimensionError("the Gaussian kernel has no explicit feature map")


def feature_map(spec: KernelSpec, x) -> FeatureVector:
    """Single-point feature map for any finite-dimensional kernel family."""
    xv = as_vector(x, "x")
    d = len(xv)
    coords = features(spec, d, xv[None, :])[0]
    if spec.family == LINEAR:
        layout = _grade_layout(d, 1)
    elif spec.family == POLYNOMIAL:
        layout = _grade_layout(d, spec.degree)
    else:
        layout = _graded_layout(d, spec.truncation)
    return FeatureVector(coords, layout)


def feature_layout(spec: KernelSpec, d: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    if spec.family == LINEAR:
        return _grade_layout(d, 1)
    if spec.family == POLYNOMIAL:
        return _grade_layout(d, spec.degree)
    if spec.family == TRUNCATED_GAUSSIAN:
        return _graded_layout(d, spec.truncation)
    raise InfiniteDimensionError("the Gaussian kernel has no explicit feature map")


# ---------------------------------------------------------------------------
# truncation-order selection
# ---------------------------------------------------------------------------

def taylor_tail_bound(norm_x: float, norm_x2: float, sigma: float, s: int) -> float:
    """Worst-case truncation error (|x| |x2| / sigma^2)^(s+1) / (s+1)!.

    Evaluated in log-space so large truncation orders do not overflow.
    """
    require(norm_x >= 0 and norm_x2 >= 0, "norms must be >= 0")
    require(sigma > 0, "sigma must be > 0")
    require(s >= 0, "s must be >= 0")
    z = norm_x * norm_x2 / sigma ** 2
    if z == 0.0:
        return 0.0
    return math.exp((s + 1) * math.log(z) - math.lgamma(s + 2))


def _log_tail(R: float, s: int) -> float:
    """log of R^(s+1) / (s+1)!."""
    return (s + 1) * math.log(R) - math.lgamma(s + 2)


@dataclass(frozen=True)
class ApproxConfig:
    """Approximation budget for teaching a Gaussian perceptron.

    ``R`` is the squared-radius scale of the data ball, ``s`` the truncation
    order chosen so the Taylor tail R^(s+1)/(s+1)! stays below ``epsilon``,
    and ``epsilon_s = epsilon / sqrt(d)^s`` the per-coordinate tail budget.
    Teaching points are drawn from a ball of radius
    ``ball_radius_factor * sqrt(R) * sigma``; the anchor must keep its
    Gaussian kernel value against every boundary point below
    ``anchor_Q * epsilon``.
    """

    epsilon: float
    R: float
    s: int
    epsilon_s: float
    d: int
    ball_radius_factor: float = 4.0
    anchor_Q: float = 1.0
    coherence_target: float = 0.0

    def __post_init__(self):
        require(0 < self.epsilon < 1, "epsilon must be in (0, 1)")
        require(self.R > 0 and self.s >= 0 and self.d >= 1, "invalid config")
        require(self.ball_radius_factor > 0 and self.anchor_Q > 0, "invalid config")
        if self.coherence_target == 0.0:
            object.__setattr__(
                self, "coherence_target", 1.0 / (2.0 * max(self.r - 1, 1))
            )

    @property
    def r(self) -> int:
        """Dimension of the truncated feature space, C(d+s, s)."""
        return math.comb(self.d + self.s, self.s)

    def teaching_ball_radius(self, sigma: float) -> float:
        """Radius of the ball teaching points are sampled from."""
        return self.ball_radius_factor * math.sqrt(self.R) * sigma

    def input_ball_radius(self, sigma: float) -> float:
        """Radius of the input-space ball |x|^2 / sigma^2 <= 2 sqrt(R)."""
        return sigma * math.sqrt(2.0 * math.sqrt(self.R))

    @classmethod
    def from_epsilon(cls, epsilon: float, d: int, **overrides) -> "ApproxConfig":
        return choose_truncation(epsilon, d, **overrides)

    @classmethod
    def from_truncation(cls, s: int, d: int, **overrides) -> "ApproxConfig":
        """Config for a caller-supplied truncation order.

        The implied closeness target inverts R = ln^2(1/eps)/e^2 at
        R = s/e^2, i.e. eps = exp(-sqrt(s)); the ball scale keeps the
        R >= d clamp.  Orders small enough to be supplied by hand sit below
        what any epsilon would select, so the tail postcondition of
        ``choose_truncation`` is not enforced here.
        """
        require(d >= 1, "d must be >= 1")
        require(s >= 1, "s must be >= 1")
        R = max(s / math.e ** 2, float(d))
        epsilon = math.exp(-math.sqrt(s))
        return cls(epsilon=epsilon, R=R, s=s,
                   epsilon_s=epsilon / math.sqrt(d) ** s, d=d, **overrides)


def choose_truncation(epsilon: float, d: int, **overrides) -> ApproxConfig:
    """Pick the data-ball scale R and truncation order s for a target epsilon.

    R = max(ln^2(1/eps) / e^2, d) and s = ceil(e^2 R), bumped up until the
    enforced tail bound R^(s+1)/(s+1)! <= eps holds.
    """
    require(0 < epsilon < 1, "epsilon must be in (0, 1)")
    require(d >= 1, "d must be >= 1")
    R = max(math.log(1.0 / epsilon) ** 2 / math.e ** 2, float(d))
    s = math.ceil(math.e ** 2 * R)
    log_eps = math.log(epsilon)
    while _log_tail(R, s) > log_eps:
        s += 1
    return ApproxConfig(epsilon=epsilon, R=R, s=s,
                        epsilon_s=epsilon / math.sqrt(d) ** s, d=d, **overrides)
