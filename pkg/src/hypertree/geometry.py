"""Poincare-ball primitives.

Points are plain numpy float64 vectors with Euclidean norm < 1. All
functions are pure; batched helpers operate on (n, d) arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Euclidean margin kept between points and the ball boundary.
DEFAULT_EPS = 1e-5

# Below this excess of the arcosh argument over 1 two points are treated
# as coincident and their distance gradient is zero.
_COINCIDENT_TOL = 1e-12


def _as_vector(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise InputError(f"expected a 1-d coordinate vector, got shape {u.shape}")
    return u


def poincare_distance(u, v) -> float:
    """Hyperbolic distance between two in-ball points."""
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    diff = u - v
    alpha = 1.0 - u @ u
    beta = 1.0 - v @ v
    gamma = 1.0 + 2.0 * (diff @ diff) / (alpha * beta)
    return float(np.arccosh(max(gamma, 1.0)))


def hyperbolic_norm(u) -> float:
    """Distance from the origin: 2 artanh of the Euclidean norm."""
    u = _as_vector(u)
    return float(2.0 * np.arctanh(np.linalg.norm(u)))


def dilate(u, k: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Rescale the hyperbolic norm of ``u`` by ``k``, keeping its direction."""
    u = _as_vector(u)
    if k <= 0:
        raise InputError(f"dilation factor must be positive, got {k}")
    a = np.linalg.norm(u)
    if a == 0.0:
        return u.copy()
    target = np.tanh(k * np.arctanh(a))
    return project_to_ball(u * (target / a), eps)


def distance_gradient(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean partial derivatives of the distance w.r.t. both arguments.

    Returns zero vectors when the points (numerically) coincide.
    """
    u, v = _as_vector(u), _as_vector(v)
    diff = u - v
    alpha = 1.0 - u @ u
    beta = 1.0 - v @ v
    gamma = 1.0 + 2.0 * (diff @ diff) / (alpha * beta)
    if gamma - 1.0 < _COINCIDENT_TOL:
        return np.zeros_like(u), np.zeros_like(v)
    root = np.sqrt(gamma * gamma - 1.0)
    uv = u @ v
    grad_u = (4.0 / (beta * root)) * (((v @ v - 2.0 * uv + 1.0) / alpha**2) * u - v / alpha)
    grad_v = (4.0 / (alpha * root)) * (((u @ u - 2.0 * uv + 1.0) / beta**2) * v - u / beta)
    return grad_u, grad_v


def riemannian_rescale(theta, euclid_grad) -> np.ndarray:
    """Apply the inverse Poincare metric tensor to a Euclidean gradient."""
    theta, euclid_grad = _as_vector(theta), _as_vector(euclid_grad)
    if theta.shape != euclid_grad.shape:
        raise InputError("theta and gradient dimensions differ")
    return ((1.0 - theta @ theta) ** 2 / 4.0) * euclid_grad


def project_to_ball(u, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Clip ``u`` back inside the ball, keeping a margin of ``eps``."""
    u = _as_vector(u)
    if not 0.0 < eps < 0.1:
        raise InputError(f"eps must lie in (0, 0.1), got {eps}")
    norm = np.linalg.norm(u)
    limit = 1.0 - eps
    if norm <= limit:
        return u
    return u * (limit / norm)


@dataclass(frozen=True)
class InversionParams:
    """Sphere inversion orthogonal to the unit sphere, or the identity map.

    ``center`` is None for the identity (origin maps to itself).
    """

    center: np.ndarray | None
    radius_sq: float

    @property
    def is_identity(self) -> bool:
        return self.center is None


def inversion_to_origin(a) -> InversionParams:
    """Isometry of the ball sending ``a`` to the origin.

    The inversion sphere is centered at a / |a|^2 with squared radius
    1/|a|^2 - 1, which makes it orthogonal to the unit sphere.
    """
    a = _as_vector(a)
    sq = float(a @ a)
    if sq == 0.0:
        return InversionParams(center=None, radius_sq=0.0)
    center = a / sq
    return InversionParams(center=center, radius_sq=1.0 / sq - 1.0)


def apply_inversion(p: InversionParams, x) -> np.ndarray:
    """Apply the inversion to an in-ball point."""
    x = _as_vector(x)
    if p.is_identity:
        return x.copy()
    diff = x - p.center
    sq = diff @ diff
    if sq == 0.0:
        raise RuntimeError("inversion applied at its own center")
    return p.center + (p.radius_sq / sq) * diff


# ---------------------------------------------------------------------------
# Batched helpers used by training and evaluation.


def distances_from(points: np.ndarray, index: int) -> np.ndarray:
    """Distances from row ``index`` of ``points`` to every row (self = 0)."""
    u = points[index]
    diff = points - u
    alpha = 1.0 - u @ u
    beta = 1.0 - np.einsum("ij,ij->i", points, points)
    gamma = 1.0 + 2.0 * np.einsum("ij,ij->i", diff, diff) / (alpha * beta)
    return np.arccosh(np.maximum(gamma, 1.0))


def project_rows_to_ball(points: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Row-wise ball projection of an (n, d) array."""
    if not 0.0 < eps < 0.1:
        raise InputError(f"eps must lie in (0, 0.1), got {eps}")
    norms = np.linalg.norm(points, axis=-1, keepdims=True)
    limit = 1.0 - eps
    scale = np.where(norms > limit, limit / np.maximum(norms, 1e-300), 1.0)
    return points * scale
