"""Teaching-set constructors.

Exact constructions for linear and polynomial perceptrons, and the
epsilon-approximate construction for Gaussian perceptrons: project the target
onto the truncated feature space, sample linearly independent points on the
projected decision boundary, duplicate them with both labels, and add one
anchor point that is classified positive but nearly orthogonal (in kernel
value) to every boundary point.  A closed-form dual certificate built from
the Gaussian Gram matrix witnesses that zero training loss is attainable on
every constructed set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_vector, require
from .kernels import (
    ApproxConfig,
    FeatureVector,
    GAUSSIAN,
    KernelSpec,
    LINEAR,
    feature_dim,
    feature_layout,
    features,
    kernel_matrix,
    poly_features,
    truncated_gaussian_features,
)
from .learner import DualModel, PrimalModel
from .linalg import gram_matrix, select_independent, solve_positive_definite
from .teaching import (
    TAG_ANCHOR,
    TAG_BASIS,
    TAG_BOUNDARY_NEG,
    TAG_BOUNDARY_POS,
    TAG_OPPOSITE_SUM,
    TeachingSet,
)
from .linalg import extend_orthogonal_basis

__all__ = [
    "SearchConfig",
    "AssumptionReport",
    "TeachingError",
    "BoundarySampleError",
    "AnchorSearchError",
    "linear_teaching_set",
    "polynomial_boundary_points",
    "polynomial_teaching_set",
    "gaussian_teaching_set",
    "closed_form_dual",
    "check_assumptions",
    "axis_power_sum_model",
]

R_CONVENTION_MAIN = "main"
R_CONVENTION_APPENDIX = "appendix"


class TeachingError(RuntimeError):
    pass


class BoundarySampleError(TeachingError):
    """Sampling budget ran out before enough independent boundary points.

    Carries the points found so far and the smallest decision value seen,
    which diagnoses targets without any boundary (everything one-sided).
    """

    def __init__(self, requested: int, achieved: int, points: np.ndarray,
                 min_decision_value: float, n_sampled: int):
        self.requested = requested
        self.achieved = achieved
        self.points = points
        self.min_decision_value = min_decision_value
        self.n_sampled = n_sampled
        super().__init__(
            f"found {achieved}/{requested} independent boundary points after "
            f"{n_sampled} samples (min decision value {min_decision_value:.3e}); "
            "the target may not admit enough orthogonal feature directions"
        )


class AnchorSearchError(TeachingError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the randomized boundary and anchor searches.

    ``gram_pivot_floor`` keeps the Gaussian Gram matrix of the accepted
    boundary points factorable: a candidate is rejected when its pivot in a
    greedy Cholesky of that Gram falls below the floor (near-coincident
    contour points would otherwise make the closed-form certificate solve
    numerically singular).
    """

    ball_radius: float = 2.0
    root_tol: float = 1e-10
    pivot_tol: float = 1e-10
    budget: int = 100_000
    batch: int = 512
    min_separation: float = 0.0
    gram_pivot_floor: float = 1e-9
    margin_frac: float = 0.5
    max_bisect: int = 96

    def __post_init__(self):
        require(self.ball_radius > 0 and self.root_tol > 0, "invalid search config")
        require(self.budget >= 2 and self.batch >= 1, "invalid search config")
        require(0 < self.margin_frac <= 1, "margin_frac must be in (0, 1]")

    @classmethod
    def count_first(cls, budget: int = 300_000, min_separation: float = 1e-3,
                    **overrides) -> "SearchConfig":
        """Sampling profile for counts beyond the float-witnessable rank.

        At larger truncation orders the demanded number of boundary points
        exceeds how many numerically independent feature directions a smooth
        decision contour can exhibit in double precision (the images'
        singular values decay geometrically along an analytic curve), even
        though generic distinct points are independent in exact arithmetic.
        This profile disables the independence and Gram-pivot floors and
        keeps only a distinctness separation, so the demanded count is met;
        the assumption report still records the witnessed rank.
        """
        return cls(pivot_tol=0.0, gram_pivot_floor=0.0, budget=budget,
                   min_separation=min_separation, **overrides)


@dataclass(frozen=True)
class AssumptionReport:
    """Numeric evidence for the orthogonality, smoothness and anchor conditions."""

    requested_rank: int
    achieved_rank: int
    max_coherence: float
    coherence_bound: float
    anchor_margin: float
    anchor_leakage: float
    assumption1_ok: bool
    smoothness_ok: bool
    anchor_ok: bool

    def to_json(self) -> dict:
        return {
            "requested_rank": self.requested_rank,
            "achieved_rank": self.achieved_rank,
            "max_coherence": self.max_coherence,
            "coherence_bound": self.coherence_bound,
            "anchor_margin": self.anchor_margin,
            "anchor_leakage": self.anchor_leakage,
            "assumption1_ok": self.assumption1_ok,
            "smoothness_ok": self.smoothness_ok,
            "anchor_ok": self.anchor_ok,
        }


# ---------------------------------------------------------------------------
# linear construction
# ---------------------------------------------------------------------------

def linear_teaching_set(theta_star) -> TeachingSet:
    """All-positive teaching set that pins the linear decision boundary.

    The d-1 unit vectors orthogonal to the target plus their negated sum can
    only be classified non-negative by models orthogonal to all of them; the
    target itself then fixes the remaining sign.
    """
    theta = as_vector(theta_star, "theta_star")
    require(float(np.linalg.norm(theta)) > 0, "theta_star must be nonzero")
    d = len(theta)
    if d == 1:
        return TeachingSet(theta[None, :], np.array([1]), (TAG_ANCHOR,))
    basis = extend_orthogonal_basis(theta)
    rows = [basis, -basis.sum(axis=0)[None, :], theta[None, :]]
    tags = (TAG_BASIS,) * (d - 1) + (TAG_OPPOSITE_SUM, TAG_ANCHOR)
    return TeachingSet(np.vstack(rows), np.ones(d + 1, dtype=int), tags)


# ---------------------------------------------------------------------------
# randomized boundary sampling
# ---------------------------------------------------------------------------

def _uniform_ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    u = rng.random(n) ** (1.0 / d)
    return radius * u[:, None] * g


def _collect_roots(feature_fn, theta: np.ndarray, d: int, target_pool: int,
                   radius: float, rng: np.random.Generator,
                   search: SearchConfig) -> tuple[np.ndarray, float, int]:
    """Bisect random sign-changing chords into a pool of boundary points."""
    pool: list[np.ndarray] = []
    min_value = math.inf
    n_sampled = 0
    while n_sampled < search.budget and len(pool) < target_pool:
        X = _uniform_ball(rng, 2 * search.batch, d, radius)
        n_sampled += len(X)
        f = feature_fn(X) @ theta
        min_value = min(min_value, float(np.min(f)))
        p, q = X[:search.batch], X[search.batch:]
        fp, fq = f[:search.batch], f[search.batch:]
        crossing = fp * fq < 0
        if not np.any(crossing):
            continue
        lo, hi = p[crossing].copy(), q[crossing].copy()
        flo = fp[crossing].copy()
        tol = search.root_tol * np.maximum(np.abs(fp[crossing]), np.abs(fq[crossing]))
        for _ in range(search.max_bisect):
            mid = 0.5 * (lo + hi)
            fm = feature_fn(mid) @ theta
            same = fm * flo > 0
            lo[same] = mid[same]
            flo[same] = fm[same]
            hi[~same] = mid[~same]
        mid = 0.5 * (lo + hi)
        fm = feature_fn(mid) @ theta
        for z, ok in zip(mid, np.abs(fm) <= tol):
            if not ok:
                continue
            if search.min_separation > 0 and pool:
                dists = np.linalg.norm(np.array(pool) - z, axis=1)
                if float(np.min(dists)) < search.min_separation:
                    continue
            pool.append(z)
            if len(pool) >= target_pool:
                break
    points = np.array(pool) if pool else np.empty((0, d))
    return points, min_value, n_sampled


def _independent_subset(feats: np.ndarray, count: int, pivot_tol: float) -> list[int]:
    """Greedy feature-space independence filter over a candidate pool."""
    if pivot_tol <= 0:
        return list(range(min(count, len(feats))))
    return select_independent(feats, count, pivot_tol)


def _spread_subset(pool: np.ndarray, feats: np.ndarray, count: int,
                   search: SearchConfig, spec: KernelSpec) -> list[int]:
    """Pick ``count`` pool indices by pivoted Cholesky on the kernel Gram.

    Taking the largest remaining pivot at every step spreads the points as
    far apart (in kernel geometry) as the pool allows, which is what keeps
    the teaching set's Gram matrix solvable; a greedy first-come acceptance
    would crowd early points and block the rest.  Feature independence is
    checked alongside when a positive pivot tolerance is configured.
    """
    n = len(pool)
    gram = kernel_matrix(spec, pool, pool)
    diag = np.diag(gram).copy()
    factors = np.zeros((n, count))
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    scale = float(np.max(np.linalg.norm(feats, axis=1))) if len(feats) else 0.0
    eligible = np.ones(n, dtype=bool)
    while len(chosen) < count and np.any(eligible):
        masked = np.where(eligible, diag, -np.inf)
        j = int(np.argmax(masked))
        pivot = float(diag[j])
        if pivot < search.gram_pivot_floor:
            break
        if search.pivot_tol > 0:
            resid = feats[j].copy()
            for b in basis:
                resid -= (resid @ b) * b
            for b in basis:
                resid -= (resid @ b) * b
            nr = float(np.linalg.norm(resid))
            if nr <= search.pivot_tol * scale:
                eligible[j] = False
                continue
            basis.append(resid / nr)
        k = len(chosen)
        root = math.sqrt(pivot)
        column = (gram[:, j] - factors[:, :k] @ factors[j, :k]) / root
        factors[:, k] = column
        diag -= column ** 2
        np.clip(diag, 0.0, None, out=diag)
        eligible[j] = False
        chosen.append(j)
    return chosen


def _sample_boundary(feature_fn, theta: np.ndarray, d: int, count: int,
                     radius: float, rng: np.random.Generator,
                     search: SearchConfig,
                     conditioning_spec: KernelSpec | None = None) -> np.ndarray:
    """Sample ``count`` points with theta . Phi(z) ~ 0 and independent images.

    Random chords with a sign change are bisected down to the root tolerance
    (relative to the chord's endpoint values).  When a conditioning kernel
    is given, the final points are chosen from a larger root pool by pivoted
    Cholesky so their kernel Gram matrix stays solvable; otherwise roots are
    kept greedily subject to the feature-independence tolerance.
    """
    if count == 0:
        return np.empty((0, d))
    use_guard = conditioning_spec is not None and search.gram_pivot_floor > 0
    target_pool = 24 * count if use_guard else (
        count if search.pivot_tol <= 0 else 8 * count)
    pool, min_value, n_sampled = _collect_roots(
        feature_fn, theta, d, target_pool, radius, rng, search)
    if len(pool) == 0:
        raise BoundarySampleError(count, 0, pool, min_value, n_sampled)
    feats = feature_fn(pool)
    if use_guard:
        chosen = _spread_subset(pool, feats, count, search, conditioning_spec)
    else:
        chosen = _independent_subset(feats, count, search.pivot_tol)
    if len(chosen) < count:
        raise BoundarySampleError(count, len(chosen), pool[chosen], min_value,
                                  n_sampled)
    return pool[chosen]


def _search_anchor(feature_fn, theta: np.ndarray, d: int, radius: float,
                   rng: np.random.Generator, search: SearchConfig,
                   boundary: np.ndarray, leakage_spec: KernelSpec | None,
                   leakage_cap: float | None, sign: int = 1) -> np.ndarray:
    """Rejection-sample an anchor with a healthy margin on the requested side.

    When a leakage cap is given, the anchor must additionally keep its kernel
    value against every boundary point at or below the cap; the margin
    threshold is then taken over the leakage-feasible candidates.
    """
    feasible_pts: list[np.ndarray] = []
    feasible_margins: list[float] = []
    n_sampled = 0
    # gather a sizable pool before choosing, so the margin threshold reflects
    # the whole feasible region rather than the first lucky batch
    pool_target = 4 * search.batch
    while n_sampled < search.budget and len(feasible_pts) < pool_target:
        X = _uniform_ball(rng, search.batch, d, radius)
        n_sampled += len(X)
        margins = sign * (feature_fn(X) @ theta)
        ok = margins > 0
        if leakage_cap is not None and len(boundary):
            leak = kernel_matrix(leakage_spec, X, boundary).max(axis=1)
            ok &= leak <= leakage_cap
        if np.any(ok):
            feasible_pts.extend(X[ok])
            feasible_margins.extend(margins[ok])
    if feasible_pts:
        threshold = search.margin_frac * max(feasible_margins)
        for z, m in zip(feasible_pts, feasible_margins):
            if m >= threshold:
                return z
    raise AnchorSearchError(
        f"no anchor with sign {sign:+d} satisfying the margin and leakage "
        f"constraints within {n_sampled} samples"
    )


# ---------------------------------------------------------------------------
# polynomial construction
# ---------------------------------------------------------------------------

def _check_poly_target(theta_tilde: PrimalModel, d: int, k: int) -> np.ndarray:
    require(theta_tilde.spec.family == "polynomial" and theta_tilde.spec.degree == k,
            "theta_tilde must live in the degree-k polynomial feature space")
    coords = theta_tilde.theta.coords
    require(len(coords) == feature_dim(theta_tilde.spec, d),
            "theta_tilde has the wrong feature dimension")
    nrm = float(np.linalg.norm(coords))
    require(nrm > 0, "theta_tilde must be nonzero")
    return coords / nrm


def polynomial_boundary_points(theta_tilde: PrimalModel, d: int, k: int,
                               count: int, rng_seed: int,
                               search: SearchConfig | None = None) -> np.ndarray:
    """Points on the zero set of the polynomial target with independent images."""
    require(count >= 0, "count must be >= 0")
    theta = _check_poly_target(theta_tilde, d, k)
    search = search or SearchConfig()
    rng = np.random.default_rng(rng_seed)
    return _sample_boundary(lambda X: poly_features(d, k, X), theta, d, count,
                            search.ball_radius, rng, search)


def polynomial_teaching_set(theta_tilde: PrimalModel, d: int, k: int,
                            rng_seed: int, search: SearchConfig | None = None,
                            ) -> tuple[TeachingSet, AssumptionReport]:
    """Duplicated boundary pairs plus one positive anchor; 2r-1 items total."""
    theta = _check_poly_target(theta_tilde, d, k)
    search = search or SearchConfig()
    rng = np.random.default_rng(rng_seed)
    r = feature_dim(theta_tilde.spec, d)
    feature_fn = lambda X: poly_features(d, k, X)
    boundary = _sample_boundary(feature_fn, theta, d, r - 1,
                                search.ball_radius, rng, search)
    anchor = _search_anchor(feature_fn, theta, d, search.ball_radius, rng,
                            search, boundary, None, None)
    ts = _assemble(boundary, [(anchor, 1)])
    unit_target = PrimalModel(theta_tilde.spec,
                              FeatureVector(theta, theta_tilde.theta.index_map))
    return ts, check_assumptions(ts, unit_target)


def axis_power_sum_model(d: int, k: int) -> PrimalModel:
    """Normalized sum of axis-point features: f(x) = sum_i x_i^k / sqrt(d).

    For even k the decision value is positive everywhere away from the
    origin, so the zero set contains no usable boundary points.
    """
    spec = KernelSpec.polynomial(k)
    coords = poly_features(d, k, np.eye(d)).sum(axis=0) / math.sqrt(d)
    return PrimalModel(spec, FeatureVector(coords, feature_layout(spec, d)))


# ---------------------------------------------------------------------------
# Gaussian construction
# ---------------------------------------------------------------------------

def _project_target(theta_star: DualModel, s: int) -> PrimalModel:
    """Truncate each center's feature expansion and renormalize the sum."""
    sigma = theta_star.spec.sigma
    d = theta_star.input_dim
    feats = truncated_gaussian_features(d, sigma, s, theta_star.centers)
    coords = feats.T @ theta_star.coefficients
    nrm = float(np.linalg.norm(coords))
    require(nrm > 0, "target projects to zero in the truncated space")
    spec = KernelSpec.truncated_gaussian(sigma, s)
    return PrimalModel(spec, FeatureVector(coords / nrm, feature_layout(spec, d)))


def gaussian_teaching_set(
    theta_star: DualModel,
    epsilon: float | None,
    rng_seed: int,
    s: int | None = None,
    search: SearchConfig | None = None,
    r_convention: str = R_CONVENTION_MAIN,
    ball_radius_factor: float = 4.0,
    anchor_Q: float = 1.0,
) -> tuple[TeachingSet, ApproxConfig, AssumptionReport]:
    """Construct an approximate teaching set for a Gaussian perceptron.

    The truncation order comes from ``epsilon`` unless ``s`` is supplied
    directly.  With the default (main) convention the set holds r-1 boundary
    pairs and one positive anchor; the appendix convention adds a second,
    negatively-labelled anchor instead.
    """
    require(theta_star.spec.family == GAUSSIAN,
            "theta_star must use a Gaussian kernel")
    require(r_convention in (R_CONVENTION_MAIN, R_CONVENTION_APPENDIX),
            f"unknown r convention {r_convention!r}")
    d = theta_star.input_dim
    sigma = theta_star.spec.sigma
    if s is not None:
        config = ApproxConfig.from_truncation(
            s, d, ball_radius_factor=ball_radius_factor, anchor_Q=anchor_Q)
    else:
        require(epsilon is not None, "either epsilon or s must be given")
        config = ApproxConfig.from_epsilon(
            epsilon, d, ball_radius_factor=ball_radius_factor, anchor_Q=anchor_Q)

    radius = config.teaching_ball_radius(sigma)
    center_norms = np.linalg.norm(theta_star.centers, axis=1)
    require(float(center_norms.max()) <= radius,
            "target centers fall outside the configured input ball")

    theta_tilde = _project_target(theta_star, config.s)
    search = search or SearchConfig()
    rng = np.random.default_rng(rng_seed)
    feature_fn = lambda X: truncated_gaussian_features(d, sigma, config.s, X)
    theta = theta_tilde.theta.coords

    boundary = _sample_boundary(feature_fn, theta, d, config.r - 1,
                                radius, rng, search,
                                conditioning_spec=KernelSpec.gaussian(sigma))
    leak_spec = KernelSpec.gaussian(sigma)
    leak_cap = config.anchor_Q * config.epsilon
    anchors = []
    if r_convention == R_CONVENTION_APPENDIX:
        neg = _search_anchor(feature_fn, theta, d, radius, rng, search,
                             boundary, leak_spec, leak_cap, sign=-1)
        anchors.append((neg, -1))
    pos = _search_anchor(feature_fn, theta, d, radius, rng, search,
                         boundary, leak_spec, leak_cap, sign=1)
    anchors.append((pos, 1))
    ts = _assemble(boundary, anchors)
    return ts, config, check_assumptions(ts, theta_tilde, config)


def _assemble(boundary: np.ndarray, anchors: list[tuple[np.ndarray, int]]) -> TeachingSet:
    points, labels, tags = [], [], []
    for z in boundary:
        points.extend([z, z])
        labels.extend([1, -1])
        tags.extend([TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG])
    for a, y in anchors:
        points.append(a)
        labels.append(y)
        tags.append(TAG_ANCHOR)
    return TeachingSet(np.array(points), np.array(labels), tuple(tags))


# ---------------------------------------------------------------------------
# closed-form certificate and assumption checking
# ---------------------------------------------------------------------------

def closed_form_dual(ts: TeachingSet, sigma: float) -> DualModel:
    """Unit-norm dual model with zero loss on a boundary-pairs + anchor set.

    Solves Lambda eta = (0, ..., 0, 1) over the Gaussian Gram matrix of the
    centers (boundary points first, anchor last) and rescales by
    1 / sqrt(eta^T Lambda eta), so the result vanishes on every boundary
    point and is strictly positive on the anchor.
    """
    Z = ts.boundary_points()
    a = ts.points[ts.anchor_index()]
    require(len(ts) == 2 * len(Z) + 1,
            "teaching set must consist of boundary pairs plus a single anchor")
    centers = np.vstack([Z, a[None, :]]) if len(Z) else a[None, :]
    lam = gram_matrix(KernelSpec.gaussian(sigma), centers)
    rhs = np.zeros(len(centers))
    rhs[-1] = 1.0
    eta, _ = solve_positive_definite(lam, rhs, pivot_tol=1e-10)
    beta0 = float(eta @ (lam.entries @ eta))
    require(beta0 > 0, "certificate has non-positive squared norm")
    return DualModel(lam.spec, centers, eta / math.sqrt(beta0))


def check_assumptions(ts: TeachingSet, theta_tilde: PrimalModel,
                      config: ApproxConfig | None = None) -> AssumptionReport:
    """Measure rank, coherence, and anchor quality of a teaching set.

    Rank and coherence are computed over the feature images of the
    orthogonality witnesses (the basis items of a linear set, the distinct
    boundary points otherwise).  Anchor leakage uses the full Gaussian kernel
    whenever the target carries a bandwidth; it is compared against
    Q * epsilon only when an approximation config is supplied.
    """
    spec = theta_tilde.spec
    d = ts.d
    if spec.family == LINEAR:
        Z = np.array([ts.points[i] for i, t in enumerate(ts.tags) if t == TAG_BASIS])
        Z = Z if len(Z) else np.empty((0, d))
    else:
        Z = ts.boundary_points()
    requested = feature_dim(spec, d) - 1
    if len(Z):
        F = features(spec, d, Z)
        achieved = int(np.linalg.matrix_rank(F))
    else:
        achieved = 0
    max_coherence = 0.0
    if len(Z) >= 2:
        norms = np.linalg.norm(F, axis=1, keepdims=True)
        unit = F / np.maximum(norms, 1e-300)
        G = np.abs(unit @ unit.T)
        np.fill_diagonal(G, 0.0)
        max_coherence = float(G.max())
    bound = 1.0 / (2.0 * max(requested, 1))

    try:
        a = ts.points[ts.anchor_index()]
        margin = float(features(spec, d, a[None, :])[0] @ theta_tilde.theta.coords)
        if len(Z):
            leak_spec = (KernelSpec.gaussian(spec.sigma)
                         if spec.sigma is not None else spec)
            leakage = float(kernel_matrix(leak_spec, a[None, :], Z).max())
        else:
            leakage = 0.0
        anchor_ok = margin > 0
        if config is not None:
            anchor_ok = anchor_ok and leakage <= config.anchor_Q * config.epsilon
    except ValueError:
        margin, leakage, anchor_ok = 0.0, 0.0, False

    return AssumptionReport(
        requested_rank=requested,
        achieved_rank=achieved,
        max_coherence=max_coherence,
        coherence_bound=bound,
        anchor_margin=margin,
        anchor_leakage=leakage,
        assumption1_ok=achieved == requested,
        smoothness_ok=max_coherence <= bound,
        anchor_ok=anchor_ok,
    )
