"""Cubic-spline SPH kernel.

Parameterized by the support radius: W and its gradient vanish at and
beyond `support_radius`, and W integrates to one over its support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SphKernel:
    support_radius: float

    def __post_init__(self):
        if not self.support_radius > 0:
            raise ValueError("support radius must be positive")

    @property
    def _h(self) -> float:
        # classic smoothing length: support = 2h
        return self.support_radius / 2.0

    @property
    def _sigma(self) -> float:
        return 1.0 / (np.pi * self._h**3)

    def w(self, r):
        """Kernel value at distance r (scalar or array)."""
        q = np.asarray(r, dtype=float) / self._h
        out = np.zeros_like(q)
        near = q < 1.0
        mid = (q >= 1.0) & (q < 2.0)
        out[near] = 1.0 - 1.5 * q[near] ** 2 + 0.75 * q[near] ** 3
        out[mid] = 0.25 * (2.0 - q[mid]) ** 3
        return self._sigma * out

    def dw_dr(self, r):
        """Radial derivative dW/dr."""
        q = np.asarray(r, dtype=float) / self._h
        out = np.zeros_like(q)
        near = q < 1.0
        mid = (q >= 1.0) & (q < 2.0)
        out[near] = -3.0 * q[near] + 2.25 * q[near] ** 2
        out[mid] = -0.75 * (2.0 - q[mid]) ** 2
        return self._sigma / self._h * out

    def grad_w(self, rvec, r=None):
        """Vector gradient with respect to the first argument of W(|x_i - x_j|).

        rvec is x_i - x_j with shape (n, 3); r = |rvec| may be passed to
        reuse a precomputed norm. The r -> 0 limit is zero.
        """
        rvec = np.atleast_2d(rvec)
        if r is None:
            r = np.linalg.norm(rvec, axis=1)
        r = np.asarray(r, dtype=float)
        coef = np.zeros_like(r)
        ok = r > 1e-12
        coef[ok] = self.dw_dr(r[ok]) / r[ok]
        return rvec * coef[:, None]
