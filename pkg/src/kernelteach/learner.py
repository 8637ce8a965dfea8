"""The kernel perceptron ERM learner.

``fit`` minimizes the perceptron loss sum(max(-y f(x), 0)) by projected
subgradient descent.  Linear models are optimized directly in primal
coordinates; every other kernel is optimized over dual coefficients on the
teaching-set centers, with the RKHS norm rescaled into a band around 1 and
the coefficient l1 norm capped after every step.  ``brute_force_fit`` is an
independent grid-search oracle for feature dimensions up to 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, as_vector, require
from .kernels import (
    GAUSSIAN,
    LINEAR,
    FeatureVector,
    KernelSpec,
    feature_dim,
    feature_layout,
    features,
    kernel_matrix,
)
from .linalg import gram_matrix
from .teaching import TAG_BOUNDARY_POS, TeachingSet

__all__ = [
    "DualModel",
    "PrimalModel",
    "LearnerConfig",
    "FitNotConverged",
    "decision_value",
    "training_loss",
    "fit",
    "brute_force_fit",
    "rkhs_norm",
]


@dataclass(frozen=True)
class DualModel:
    """A hypothesis stored as coefficient/center pairs, f(x) = sum_j c_j K(a_j, x)."""

    spec: KernelSpec
    centers: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "centers", as_matrix(self.centers, "centers"))
        object.__setattr__(self, "coefficients",
                           as_vector(self.coefficients, "coefficients"))
        require(len(self.centers) == len(self.coefficients),
                "centers and coefficients must have equal length")

    @property
    def input_dim(self) -> int:
        return self.centers.shape[1]

    @property
    def coefficient_l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def decision_values(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        return kernel_matrix(self.spec, X, self.centers) @ self.coefficients

    def scaled(self, t: float) -> "DualModel":
        return DualModel(self.spec, self.centers, t * self.coefficients)

    def to_json(self) -> dict:
        kernel = {"family": self.spec.family}
        for key in ("degree", "sigma", "truncation"):
            value = getattr(self.spec, key)
            if value is not None:
                kernel[key] = value
        return {
            "version": 1,
            "kernel": kernel,
            "centers": self.centers.tolist(),
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DualModel":
        require(doc.get("version") == 1, "unsupported model document version")
        kernel = dict(doc["kernel"])
        spec = KernelSpec(kernel.pop("family"), **kernel)
        return cls(spec, np.array(doc["centers"], dtype=float),
                   np.array(doc["coefficients"], dtype=float))


@dataclass(frozen=True)
class PrimalModel:
    """A hypothesis as an explicit feature-space vector, f(x) = theta . Phi(x)."""

    spec: KernelSpec
    theta: FeatureVector

    def __post_init__(self):
        require(self.spec.family != GAUSSIAN,
                "the Gaussian kernel has no finite primal representation")

    @property
    def input_dim(self) -> int:
        return len(self.theta.index_map[0][1])

    def decision_values(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        return features(self.spec, self.input_dim, X) @ self.theta.coords

    def scaled(self, t: float) -> "PrimalModel":
        return PrimalModel(self.spec,
                           FeatureVector(t * self.theta.coords, self.theta.index_map))


Model = DualModel | PrimalModel


@dataclass(frozen=True)
class LearnerConfig:
    """Optimization knobs for ``fit``.

    The step size is capped at ``step_c / sqrt(t)`` and, once near the
    optimum, trails the Polyak step loss/|g|^2 targeting zero loss (solvable
    teaching sets admit exact zero).  ``coeff_bound`` defaults to 10 times
    the number of centers when left unset.
    """

    max_iters: int = 20000
    step_c: float = 0.5
    loss_tol: float = 1e-6
    norm_band: tuple[float, float] = (0.9, 1.1)
    coeff_bound: float | None = None
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.norm_band
        require(0 < lo <= 1.0 <= hi, "norm band must straddle 1")
        require(self.max_iters >= 1 and self.step_c > 0, "invalid config")
        if self.coeff_bound is not None:
            require(self.coeff_bound > 0, "coeff_bound must be > 0")


class FitNotConverged(RuntimeError):
    """Loss stayed above tolerance; carries the best model found."""

    def __init__(self, model: Model, loss: float, tol: float):
        self.model = model
        self.loss = loss
        super().__init__(
            f"training loss {loss:.3e} above tolerance {tol:.3e} after fitting"
        )


def decision_value(model: Model, x):
    """f(x) for a single point (returns float) or a batch (returns array)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    values = model.decision_values(arr if not single else arr[None, :])
    return float(values[0]) if single else values


def training_loss(model: Model, ts: TeachingSet) -> float:
    """Total perceptron loss sum_i max(-y_i f(x_i), 0) on a teaching set."""
    margins = ts.labels * model.decision_values(ts.points)
    return float(np.sum(np.maximum(-margins, 0.0)))


def _project_l1(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of the given radius."""
    if float(np.abs(v).sum()) <= radius:
        return v
    mags = np.sort(np.abs(v))[::-1]
    cumulative = np.cumsum(mags) - radius
    ranks = np.arange(1, len(v) + 1)
    keep = mags - cumulative / ranks > 0
    k = int(np.max(ranks[keep]))
    threshold = cumulative[k - 1] / k
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


class _PrimalSpace:
    """Linear-kernel coordinates: the state is theta itself."""

    def __init__(self, X: np.ndarray):
        self.X = X
        self.m = X.shape[1]

    def margins(self, y, theta):
        return y * (self.X @ theta)

    def grad(self, y, active):
        return -(self.X[active].T @ y[active])

    def norm(self, theta):
        return float(np.linalg.norm(theta))

    def l1(self, theta):
        return float(np.abs(theta).sum())

    def clip_l1(self, theta, bound):
        return _project_l1(theta, bound)

    def seed_state(self, g):
        return g / max(float(np.linalg.norm(g)), 1e-300)

    def label_state(self, y):
        return None

    def coefficients(self, theta):
        return theta


class _CoefficientSpace:
    """Dual-kernel coordinates: the state is the coefficient vector itself.

    Subgradient steps are kernel combinations of the active points (the
    classical kernel perceptron update), which keeps iterates smooth and
    their l1 norm controlled; the natural geometry for fitting datasets.
    """

    def __init__(self, lam: np.ndarray, F: np.ndarray, cidx: np.ndarray | None):
        self.lam = lam
        self.F = F
        self.m = len(lam)
        self.cidx = cidx
        floor = 1e-12 * float(np.max(np.diag(lam)))
        while True:
            try:
                self.L = np.linalg.cholesky(lam + floor * np.eye(self.m))
                break
            except np.linalg.LinAlgError:
                floor *= 16.0

    def margins(self, y, eta):
        return y * (self.F @ eta)

    def grad(self, y, active):
        return -(self.F[active].T @ y[active])

    def norm(self, eta):
        return float(np.linalg.norm(self.L.T @ eta))

    def l1(self, eta):
        return float(np.abs(eta).sum())

    def clip_l1(self, eta, bound):
        return _project_l1(eta, bound)

    def seed_state(self, g):
        return g / max(self.norm(g), 1e-300)

    def label_state(self, y):
        if self.cidx is None:
            return None
        eta = np.bincount(self.cidx, weights=y, minlength=self.m)
        nrm = self.norm(eta)
        return eta / nrm if nrm > 1e-12 else None

    def coefficients(self, eta):
        return eta


class _ValueSpace:
    """Dual-kernel coordinates: the state is the decision values at the centers.

    Coefficient-space subgradient steps inherit the Gram matrix conditioning
    (teaching points cluster on a contour, so the zero-loss cone is a thin
    sliver in eta coordinates).  The value coordinates z = Lambda eta make
    the loss a function of single state entries whenever training points
    coincide with centers, which holds for every teaching set and for
    reference training; the coefficients are recovered at the end by a
    refined positive-definite solve.
    """

    def __init__(self, lam: np.ndarray, F: np.ndarray, cidx: np.ndarray | None):
        from scipy.linalg import solve_triangular
        self._tri = solve_triangular
        self.lam = lam
        self.m = len(lam)
        floor = 1e-12 * float(np.max(np.diag(lam)))
        while True:
            try:
                self.L = np.linalg.cholesky(lam + floor * np.eye(self.m))
                break
            except np.linalg.LinAlgError:
                floor *= 16.0
        if cidx is not None:
            self.cidx = cidx
            self.S = None
        else:
            self.cidx = None
            self.S = np.linalg.solve(lam + floor * np.eye(self.m), F.T).T

    def margins(self, y, z):
        values = z[self.cidx] if self.S is None else self.S @ z
        return y * values

    def grad(self, y, active):
        if self.S is None:
            return -np.bincount(self.cidx[active], weights=y[active],
                                minlength=self.m)
        return -(self.S[active].T @ y[active])

    def norm(self, z):
        w = self._tri(self.L, z, lower=True)
        return float(np.linalg.norm(w))

    def _eta(self, z):
        w = self._tri(self.L, z, lower=True)
        return self._tri(self.L.T, w, lower=False)

    def l1(self, z):
        return float(np.abs(self._eta(z)).sum())

    def clip_l1(self, z, bound):
        eta = _project_l1(self._eta(z), bound)
        return self.lam @ eta

    def seed_state(self, g):
        # random *coefficients*: random decision values would correspond to
        # near-singular Gram directions with an enormous l1-to-norm ratio
        z = self.lam @ g
        w = self._tri(self.L, z, lower=True)
        return z / max(float(np.linalg.norm(w)), 1e-300)

    def label_state(self, y):
        """Classical kernel-perceptron direction: label-aggregate coefficients."""
        if self.cidx is None:
            return None
        eta = np.bincount(self.cidx, weights=y, minlength=self.m)
        z = self.lam @ eta
        w = self._tri(self.L, z, lower=True)
        nrm = float(np.linalg.norm(w))
        return z / nrm if nrm > 1e-12 else None

    def coefficients(self, z):
        eta = self._eta(z)
        for _ in range(3):
            eta = eta + self._eta(z - self.lam @ eta)
        return eta


def fit(
    ts: TeachingSet,
    spec: KernelSpec,
    config: LearnerConfig | None = None,
    trace: list | None = None,
) -> Model:
    """Projected subgradient descent on the perceptron loss.

    Linear kernels are fit in primal coordinates; all others over dual
    coefficients on ``ts.centers()``, iterated in decision-value coordinates
    for conditioning.  After every step the iterate is rescaled into the
    RKHS norm band and its coefficient l1 norm is capped.  The best iterate
    by (scale-normalized) loss is returned, normalized to unit RKHS norm.
    Raises FitNotConverged (carrying the best model) when the final loss
    exceeds ``config.loss_tol``; callers may accept or reject the attached
    model.
    """
    require(len(ts) >= 1, "teaching set must be non-empty")
    config = config or LearnerConfig()
    y = ts.labels.astype(float)

    if spec.family == LINEAR:
        centers = None
        space = _PrimalSpace(ts.points)
    else:
        centers = ts.centers()
        F = kernel_matrix(spec, ts.points, centers)
        lam = gram_matrix(spec, centers).entries
        cidx = np.full(len(ts.points), -1)
        for i, row in enumerate(ts.points):
            for j, c in enumerate(centers):
                if np.array_equal(row, c):
                    cidx[i] = j
                    break
        if not np.all(cidx >= 0):
            cidx = None
        # boundary-pair sets pin decision values at the centers, which is
        # badly conditioned in coefficient coordinates when the centers
        # cluster on a contour; generic data wants the smooth coefficient
        # steps of the classical kernel perceptron
        paired = any(t == TAG_BOUNDARY_POS for t in ts.tags)
        if paired and cidx is not None:
            space = _ValueSpace(lam, F, cidx)
        else:
            space = _CoefficientSpace(lam, F, cidx)

    bound = config.coeff_bound if config.coeff_bound is not None else 10.0 * space.m
    lo, hi = config.norm_band
    rng = np.random.default_rng(config.seed)

    state = space.label_state(y)
    if state is None:
        state = space.seed_state(rng.standard_normal(space.m))
    # best iterate by the loss of the *normalized* model, since that is what
    # fit returns; this makes the selection invariant to iterate scale
    best_loss = math.inf
    best_state = state.copy()
    last_improved = 0
    t_local = 0
    for t in range(1, config.max_iters + 1):
        t_local += 1
        margins = space.margins(y, state)
        active = margins < 0
        loss = float(-np.sum(margins[active]))
        nrm = space.norm(state)
        scaled_loss = loss / nrm if nrm > 0 else math.inf
        if scaled_loss < best_loss:
            # sub-0.1% improvements do not reset the stall clock, otherwise
            # a geometrically creeping tail burns the whole budget
            if scaled_loss < 0.999 * best_loss or scaled_loss == 0.0:
                last_improved = t
            best_loss = scaled_loss
            best_state = state / nrm
        if trace is not None:
            trace.append(best_loss)
        if best_loss == 0.0:
            break
        if t - last_improved >= 100:
            if best_loss <= config.loss_tol:
                break  # converged and stalled at float noise
            # stalled above tolerance (e.g. trapped opposite the target
            # direction): restart from a fresh random direction
            state = space.seed_state(rng.standard_normal(space.m))
            last_improved = t
            t_local = 0
            continue

        grad = space.grad(y, active)
        gsq = float(grad @ grad)
        if gsq == 0.0:
            break
        step = min(config.step_c / math.sqrt(max(t_local, 1)), loss / gsq)
        state = state - step * grad

        nrm = space.norm(state)
        if nrm == 0.0:
            state = space.seed_state(rng.standard_normal(space.m))
            nrm = 1.0
        if nrm > hi:
            state *= hi / nrm
            nrm = hi
        elif nrm < lo:
            state *= lo / nrm
            nrm = lo
        # the coefficient cap applies to the unit-norm model, so scale it by
        # the current iterate norm; a plain rescale cannot enforce it
        if space.l1(state) > bound * nrm:
            state = space.clip_l1(state, bound * nrm)

    nrm = space.norm(best_state)
    require(nrm > 0, "fit collapsed to the zero model")
    state = best_state / nrm
    for _ in range(50):
        if space.l1(state) <= bound * (1.0 + 1e-9):
            break
        state = space.clip_l1(state, bound)
        nrm = space.norm(state)
        require(nrm > 0, "coefficient cap admits no unit-norm model")
        state = state / nrm
    eta = space.coefficients(state)
    if spec.family == LINEAR:
        model: Model = PrimalModel(
            spec, FeatureVector(eta, feature_layout(spec, ts.d)))
    else:
        model = DualModel(spec, centers, eta)
    final_loss = training_loss(model, ts)
    if final_loss > config.loss_tol:
        raise FitNotConverged(model, final_loss, config.loss_tol)
    return model


def _sphere_grid(p: int, resolution: int) -> np.ndarray:
    if p == 1:
        return np.array([[1.0], [-1.0]])
    if p == 2:
        az = 2.0 * np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(az), np.sin(az)])
    az = 2.0 * np.pi * np.arange(resolution) / resolution
    polar = np.pi * np.arange(resolution + 1) / resolution
    if p == 3:
        ph, ps = np.meshgrid(polar, az, indexing="ij")
        ph, ps = ph.ravel(), ps.ravel()
        return np.column_stack([
            np.sin(ph) * np.cos(ps), np.sin(ph) * np.sin(ps), np.cos(ph)])
    p1, p2, ps = np.meshgrid(polar, polar, az, indexing="ij")
    p1, p2, ps = p1.ravel(), p2.ravel(), ps.ravel()
    return np.column_stack([
        np.cos(p1),
        np.sin(p1) * np.cos(p2),
        np.sin(p1) * np.sin(p2) * np.cos(ps),
        np.sin(p1) * np.sin(p2) * np.sin(ps)])


def brute_force_fit(ts: TeachingSet, spec: KernelSpec, resolution: int) -> PrimalModel:
    """Grid search over unit feature-space directions; a desk-scale oracle.

    Only usable when the feature dimension is at most 4.  Returns the first
    minimum-loss direction on the angular grid.
    """
    require(resolution >= 4, "resolution must be >= 4")
    p = feature_dim(spec, ts.d)
    if p > 4:
        raise ValueError(f"feature dimension {p} exceeds brute-force limit 4")
    feats = features(spec, ts.d, ts.points)
    directions = _sphere_grid(p, resolution)
    margins = ts.labels.astype(float)[None, :] * (directions @ feats.T)
    losses = np.maximum(-margins, 0.0).sum(axis=1)
    best = int(np.argmin(losses))
    return PrimalModel(
        spec, FeatureVector(directions[best], feature_layout(spec, ts.d)))


def rkhs_norm(model: Model) -> float:
    """RKHS norm; for dual models sqrt(eta^T Lambda eta) over the model's centers."""
    if isinstance(model, PrimalModel):
        return float(np.linalg.norm(model.theta.coords))
    lam = gram_matrix(model.spec, model.centers).entries
    q = float(model.coefficients @ (lam @ model.coefficients))
    if q < -1e-12:
        raise np.linalg.LinAlgError(f"Gram quadratic form is negative ({q:.3e})")
    return math.sqrt(max(q, 0.0))
