import numpy as np
import pytest

import kernelteach as kt


@pytest.fixture(scope="session")
def gaussian_spec():
    return kt.KernelSpec.gaussian(0.9)


@pytest.fixture(scope="session")
def circles_reference(gaussian_spec):
    """Reference separator trained on the circles generator."""
    data = kt.generate("circles", 200, 0.05, seed=11)
    ref = kt.train_reference(data, gaussian_spec,
                             kt.LearnerConfig(seed=11, coeff_bound=20.0))
    return data, ref


@pytest.fixture(scope="session")
def checkerboard_target(gaussian_spec):
    """Unit-norm target with alternating bumps on a jittered grid.

    Its decision boundary has many separated branches, so large numbers of
    well-spread boundary points exist; used wherever full-rank construction
    at higher truncation orders is required.
    """
    rng = np.random.default_rng(7)
    points, coeffs = [], []
    for i in range(-2, 3):
        for j in range(-2, 3):
            points.append(np.array([1.1 * i, 1.1 * j]) + rng.uniform(-0.25, 0.25, 2))
            coeffs.append(((-1.0) ** (i + j)) * rng.uniform(0.7, 1.3))
    raw = kt.DualModel(gaussian_spec, np.array(points), np.array(coeffs))
    return kt.DualModel(gaussian_spec, np.array(points),
                        np.array(coeffs) / kt.rkhs_norm(raw))


def linear_primal(theta):
    theta = np.asarray(theta, dtype=float)
    spec = kt.KernelSpec.linear()
    from kernelteach.kernels import feature_layout
    return kt.PrimalModel(
        spec, kt.FeatureVector(theta, feature_layout(spec, len(theta))))


def poly_primal(coords, d, k):
    coords = np.asarray(coords, dtype=float)
    spec = kt.KernelSpec.polynomial(k)
    from kernelteach.kernels import feature_layout
    return kt.PrimalModel(spec, kt.FeatureVector(coords, feature_layout(spec, d)))
