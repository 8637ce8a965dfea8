"""Risk and closeness metrics for comparing taught and target models.

Expectations are empirical means over the supplied dataset or probe points;
the pointwise sup-gap upper-bounds the risk gap through the 1-Lipschitz
hinge, and direction similarity gives a scale-free measure of boundary
recovery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, require
from .kernels import GAUSSIAN, features, kernel_matrix
from .learner import DualModel, Model, PrimalModel

__all__ = [
    "RiskReport",
    "perceptron_risk",
    "risk_gap",
    "pointwise_gap",
    "direction_similarity",
    "sign_agreement",
]


@dataclass(frozen=True)
class RiskReport:
    """Empirical risks of two models plus their gap and pointwise spread."""

    err_star: float
    err_hat: float
    gap: float
    n_samples: int
    pointwise_sup: float
    sign_agreement: float

    def to_json(self) -> dict:
        return {
            "err_star": self.err_star,
            "err_hat": self.err_hat,
            "gap": self.gap,
            "n_samples": self.n_samples,
            "pointwise_sup": self.pointwise_sup,
            "sign_agreement": self.sign_agreement,
        }


def perceptron_risk(model: Model, dataset) -> float:
    """Mean perceptron loss max(-y f(x), 0) over a dataset."""
    points = as_matrix(dataset.points, "points")
    require(len(points) >= 1, "dataset must be non-empty")
    margins = np.asarray(dataset.labels, dtype=float) * model.decision_values(points)
    return float(np.mean(np.maximum(-margins, 0.0)))


def risk_gap(f_star: Model, f_hat: Model, dataset) -> RiskReport:
    """Absolute difference of empirical risks, with pointwise diagnostics."""
    err_star = perceptron_risk(f_star, dataset)
    err_hat = perceptron_risk(f_hat, dataset)
    points = as_matrix(dataset.points, "points")
    vals_star = f_star.decision_values(points)
    vals_hat = f_hat.decision_values(points)
    sup = float(np.max(np.abs(vals_star - vals_hat)))
    band = 1e-6 * float(np.max(np.abs(vals_star)))
    keep = np.abs(vals_star) > band
    agreement = (float(np.mean(np.sign(vals_star[keep]) == np.sign(vals_hat[keep])))
                 if np.any(keep) else 1.0)
    return RiskReport(
        err_star=err_star,
        err_hat=err_hat,
        gap=abs(err_star - err_hat),
        n_samples=len(points),
        pointwise_sup=sup,
        sign_agreement=agreement,
    )


def pointwise_gap(f_star: Model, f_hat: Model, probe_points) -> float:
    """max over probes of |f_star(x) - f_hat(x)|."""
    probes = as_matrix(probe_points, "probe_points")
    return float(np.max(np.abs(
        f_star.decision_values(probes) - f_hat.decision_values(probes))))


def _pair_inner(m1: Model, m2: Model) -> float:
    if isinstance(m1, DualModel) and isinstance(m2, DualModel):
        K = kernel_matrix(m1.spec, m1.centers, m2.centers)
        return float(m1.coefficients @ K @ m2.coefficients)
    c1 = _primal_coords(m1)
    c2 = _primal_coords(m2)
    require(len(c1) == len(c2), "models live in different feature spaces")
    return float(c1 @ c2)


def _primal_coords(model: Model) -> np.ndarray:
    if isinstance(model, PrimalModel):
        return model.theta.coords
    return features(model.spec, model.input_dim, model.centers).T @ model.coefficients


def direction_similarity(m1: Model, m2: Model) -> float:
    """Cosine of the two hypotheses in the RKHS; invariant to positive scaling.

    Dual models are compared through the joint Gram matrix of both center
    sets; mixed dual/primal pairs are compared in the explicit feature space,
    which requires a finite-dimensional kernel.
    """
    require(m1.spec.family == m2.spec.family,
            "models must use the same kernel family")
    if m1.spec.family == GAUSSIAN:
        require(m1.spec.sigma == m2.spec.sigma,
                "models must use the same bandwidth")
    n1 = np.sqrt(max(_pair_inner(m1, m1), 0.0))
    n2 = np.sqrt(max(_pair_inner(m2, m2), 0.0))
    require(n1 > 0 and n2 > 0, "direction similarity undefined for a zero model")
    value = _pair_inner(m1, m2) / (n1 * n2)
    require(abs(value) <= 1.0 + 1e-12, "cosine fell outside [-1, 1]")
    return float(np.clip(value, -1.0, 1.0))


def sign_agreement(m1: Model, m2: Model, probes, exclusion_band: float) -> float:
    """Fraction of probes off m1's boundary where the two models agree in sign."""
    require(exclusion_band >= 0, "exclusion_band must be >= 0")
    probes = as_matrix(probes, "probes")
    v1 = m1.decision_values(probes)
    v2 = m2.decision_values(probes)
    keep = np.abs(v1) > exclusion_band
    require(bool(np.any(keep)), "all probes fall inside the exclusion band")
    return float(np.mean(np.sign(v1[keep]) == np.sign(v2[keep])))
