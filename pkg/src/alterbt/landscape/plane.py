"""The 2D plane through three checkpoints and least-squares projection onto it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..checkpoint import Checkpoint, check_same_layout


class DegeneratePlane(ValueError):
    pass


@dataclass(frozen=True)
class PlaneBasis:
    """Base point ``theta*`` and directions ``delta``, ``eta``.

    ``point(1, 0)`` and ``point(0, 1)`` return the second and third anchor
    exactly, not a rounded re-sum of base and direction.
    """

    base: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    anchors: tuple[np.ndarray, np.ndarray, np.ndarray]
    A: float
    B: float
    C: float
    config_hash: str | None = None

    @property
    def gram(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B, self.C]])

    def point(self, x: float, y: float) -> np.ndarray:
        if x == 0.0 and y == 0.0:
            return self.anchors[0].copy()
        if x == 1.0 and y == 0.0:
            return self.anchors[1].copy()
        if x == 0.0 and y == 1.0:
            return self.anchors[2].copy()
        return self.base + x * self.delta + y * self.eta

    def in_plane_norm2(self, dx: float, dy: float) -> float:
        """Squared length of ``dx*delta + dy*eta`` via the Gram matrix."""
        return self.A * dx * dx + 2.0 * self.B * dx * dy + self.C * dy * dy


def _params(c) -> tuple[np.ndarray, str | None]:
    if isinstance(c, Checkpoint):
        return np.asarray(c.params, dtype=np.float64), c.meta.get("config_hash")
    return np.asarray(c, dtype=np.float64), None


def make_plane(c_s, c_a, c_s_next) -> PlaneBasis:
    """Plane with base ``c_s``, ``delta = c_a - c_s`` and ``eta = c_s_next - c_s``.

    Accepts checkpoints or raw parameter vectors.
    """
    (p0, h0), (p1, h1), (p2, h2) = _params(c_s), _params(c_a), _params(c_s_next)
    if not (p0.shape == p1.shape == p2.shape):
        raise ValueError("anchor checkpoints have different parameter counts")
    hashes = [h for h in (h0, h1, h2) if h is not None]
    config_hash = check_same_layout(hashes) if hashes else None
    delta = p1 - p0
    eta = p2 - p0
    A = float(np.dot(delta, delta))
    B = float(np.dot(delta, eta))
    C = float(np.dot(eta, eta))
    if A * C - B * B <= 1e-12 * A * C or A == 0.0 or C == 0.0:
        raise DegeneratePlane("degenerate plane (collinear checkpoints)")
    return PlaneBasis(p0, delta, eta, (p0.copy(), p1.copy(), p2.copy()), A, B, C, config_hash)


def project_unconstrained(plane: PlaneBasis, theta) -> tuple[float, float]:
    """Closed-form least-squares coordinates of ``theta`` on the plane."""
    theta, h = _params(theta)
    if theta.shape != plane.base.shape:
        raise ValueError("parameter count does not match the plane")
    if h is not None and plane.config_hash is not None and h != plane.config_hash:
        raise ValueError("checkpoint comes from a different model config")
    r = theta - plane.base
    U = float(np.dot(r, plane.delta))
    V = float(np.dot(r, plane.eta))
    A, B, C = plane.A, plane.B, plane.C
    den = B * B - A * C
    return (V * B - U * C) / den, (U * B - V * A) / den
