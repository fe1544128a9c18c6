"""The four-block homotopy map that lifts a complementarity problem.

For a problem with tensor A (order m, dimension n), offset q, and a strictly
positive anchor (x0, w0, z10, z20), the map takes the augmented state
v = (x, w, z1, z2) plus a parameter mu and returns the 4n-vector with blocks

    B1 = (1-mu) * (w - z1 + (m-1) * (S x^(m-2))^T (x - z2)) + mu * (x - x0)
    B2 = z1 * x   - mu * z10 * x0                       (componentwise)
    B3 = z2 * w   - mu * z20 * w0 + (1-mu) * x * w
    B4 = w - (1-mu) * (A x^(m-1) + q) - mu * w0

where S is the trailing-index symmetrization of A.  At mu = 1 the anchor is
an exact root; the root curve continued down to mu = 0 ends at a point whose
x solves the complementarity problem, with z1, z2 acting as multiplier-like
certificates.  The analytic derivatives with respect to the state and to mu
are provided for the tracer; both are cross-checked against finite
differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor

__all__ = ["Anchor", "HomotopyPoint", "HomotopyMap"]


def _positive_vector(name: str, v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or not np.all(v > 0):
        raise ValueError(f"{name} must be strictly positive and finite")
    return v


@dataclass(frozen=True)
class Anchor:
    """Strictly positive starting state (x0, w0, z1_0, z2_0)."""

    x0: np.ndarray
    w0: np.ndarray
    z1_0: np.ndarray
    z2_0: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.x0).shape[0]
        object.__setattr__(self, "x0", _positive_vector("x0", self.x0, n))
        object.__setattr__(self, "w0", _positive_vector("w0", self.w0, n))
        object.__setattr__(self, "z1_0", _positive_vector("z1_0", self.z1_0, n))
        object.__setattr__(self, "z2_0", _positive_vector("z2_0", self.z2_0, n))

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    @classmethod
    def ones(cls, n: int) -> "Anchor":
        return cls(np.ones(n), np.ones(n), np.ones(n), np.ones(n))

    @classmethod
    def from_stacked(cls, v) -> "Anchor":
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] % 4:
            raise ValueError("stacked anchor must have length 4n")
        n = v.shape[0] // 4
        return cls(v[:n], v[n : 2 * n], v[2 * n : 3 * n], v[3 * n :])

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x0, self.w0, self.z1_0, self.z2_0])


@dataclass(frozen=True)
class HomotopyPoint:
    """Augmented state (x, w, z1, z2) with its parameter value mu.

    Components must be finite; positivity and mu in [0, 1] are properties of
    accepted path points, not of the type, because corrector iterates may
    graze or briefly cross those bounds.
    """

    x: np.ndarray
    w: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    mu: float

    def __post_init__(self):
        n = np.asarray(self.x).shape[0]
        for name in ("x", "w", "z1", "z2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def state(self) -> np.ndarray:
        """The 4n state vector (x, w, z1, z2) without mu."""
        return np.concatenate([self.x, self.w, self.z1, self.z2])

    def stacked(self) -> np.ndarray:
        """State and mu as one length-(4n+1) vector, mu last."""
        return np.concatenate([self.x, self.w, self.z1, self.z2, [self.mu]])

    @classmethod
    def from_state(cls, v, mu: float) -> "HomotopyPoint":
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] % 4:
            raise ValueError("state must have length 4n")
        n = v.shape[0] // 4
        return cls(v[:n].copy(), v[n : 2 * n].copy(), v[2 * n : 3 * n].copy(),
                   v[3 * n :].copy(), mu)

    @classmethod
    def from_stacked(cls, u) -> "HomotopyPoint":
        u = np.asarray(u, dtype=float)
        return cls.from_state(u[:-1], float(u[-1]))


class HomotopyMap:
    """Homotopy map for one problem instance, with cached symmetrization."""

    def __init__(self, tensor: Tensor, q, anchor: Anchor | None = None):
        self.tensor = tensor
        self.sym = tensor.symmetrized()
        self.n = tensor.dim
        self.order = tensor.order
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise ValueError(f"q must have length {self.n}, got shape {q.shape}")
        self.q = q
        # Magnitude of the problem data, used by the tracer to judge when a
        # residual is at roundoff level for the current state scale.
        self.coeff_scale = max(
            1.0, float(np.abs(tensor.data).max()), float(np.abs(q).max())
        )
        self.anchor = anchor if anchor is not None else Anchor.ones(self.n)
        if self.anchor.n != self.n:
            raise ValueError("anchor dimension does not match the tensor")
        self._eye = np.eye(self.n)
        # For order <= 3 the cube contraction does not depend on x.
        self._cube_const = (
            self.sym.contract_cube(np.zeros(self.n)) if self.order <= 3 else None
        )
        # For order 2 the matrix contraction is the coefficient matrix itself.
        self._mat_const = self.sym.data if self.order == 2 else None

    # -- raw evaluation core (no validation; views into the stacked vector) --

    def _split(self, u: np.ndarray):
        n = self.n
        return u[:n], u[n : 2 * n], u[2 * n : 3 * n], u[3 * n : 4 * n], float(u[4 * n])

    def _sym_matrix(self, x: np.ndarray) -> np.ndarray:
        if self._mat_const is not None:
            return self._mat_const
        return self.sym.contract_matrix(x)

    def _sym_cube(self, x: np.ndarray) -> np.ndarray:
        if self._cube_const is not None:
            return self._cube_const
        return self.sym.contract_cube(x)

    def _residual_raw(self, u: np.ndarray) -> np.ndarray:
        x, w, z1, z2, mu = self._split(u)
        a = self.anchor
        m = self.order
        mt = self._sym_matrix(x).T
        b1 = (1 - mu) * (w - z1 + (m - 1) * mt @ (x - z2)) + mu * (x - a.x0)
        b2 = z1 * x - mu * a.z1_0 * a.x0
        b3 = z2 * w - mu * a.z2_0 * a.w0 + (1 - mu) * x * w
        b4 = w - (1 - mu) * (self.tensor.contract_vector(x) + self.q) - mu * a.w0
        return np.concatenate([b1, b2, b3, b4])

    def _state_jacobian_raw(self, u: np.ndarray) -> np.ndarray:
        x, w, z1, z2, mu = self._split(u)
        n, m = self.n, self.order
        eye = self._eye
        mat = self._sym_matrix(x)
        mt = mat.T
        # G[i, k] = (m-2) * sum_j cube[j, i, k] * (x - z2)[j]
        if m == 2:
            curv = 0.0
        else:
            curv = (m - 2) * np.einsum("jik,j->ik", self._sym_cube(x), x - z2)

        jac = np.zeros((4 * n, 4 * n))
        r1, r2, r3, r4 = (slice(k * n, (k + 1) * n) for k in range(4))
        jac[r1, r1] = (1 - mu) * (m - 1) * (mt + curv) + mu * eye
        jac[r1, r2] = (1 - mu) * eye
        jac[r1, r3] = -(1 - mu) * eye
        jac[r1, r4] = -(1 - mu) * (m - 1) * mt
        jac[r2, r1] = np.diag(z1)
        jac[r2, r3] = np.diag(x)
        jac[r3, r1] = (1 - mu) * np.diag(w)
        jac[r3, r2] = np.diag(z2) + (1 - mu) * np.diag(x)
        jac[r3, r4] = np.diag(w)
        jac[r4, r1] = -(1 - mu) * (m - 1) * mat
        jac[r4, r2] = eye
        return jac

    def _mu_derivative_raw(self, u: np.ndarray) -> np.ndarray:
        x, w, z1, z2, mu = self._split(u)
        a = self.anchor
        m = self.order
        mt = self._sym_matrix(x).T
        d1 = (x - a.x0) - (w - z1 + (m - 1) * mt @ (x - z2))
        d2 = -a.z1_0 * a.x0
        d3 = -a.z2_0 * a.w0 - x * w
        d4 = (self.tensor.contract_vector(x) + self.q) - a.w0
        return np.concatenate([d1, d2, d3, d4])

    def _full_jacobian_raw(self, u: np.ndarray) -> np.ndarray:
        return np.hstack(
            [self._state_jacobian_raw(u), self._mu_derivative_raw(u)[:, None]]
        )

    # -- public interface on typed points --

    def start_point(self, mu0: float = 1.0) -> HomotopyPoint:
        a = self.anchor
        return HomotopyPoint(a.x0.copy(), a.w0.copy(), a.z1_0.copy(), a.z2_0.copy(), mu0)

    def _check(self, p: HomotopyPoint):
        if p.n != self.n:
            raise ValueError(f"point dimension {p.n} does not match instance {self.n}")

    def residual(self, p: HomotopyPoint) -> np.ndarray:
        """The 4n-vector (B1, B2, B3, B4) at p."""
        self._check(p)
        return self._residual_raw(p.stacked())

    def state_jacobian(self, p: HomotopyPoint) -> np.ndarray:
        """Derivative of the residual with respect to (x, w, z1, z2).

        The only non-obvious block is dB1/dx: differentiating the bilinear
        term (S x^(m-2))^T (x - z2) produces the transposed matrix plus a
        curvature term G contracted from the next-level derivative of the
        symmetrized tensor.
        """
        self._check(p)
        return self._state_jacobian_raw(p.stacked())

    def mu_derivative(self, p: HomotopyPoint) -> np.ndarray:
        """Derivative of the residual with respect to mu."""
        self._check(p)
        return self._mu_derivative_raw(p.stacked())

    def full_jacobian(self, p: HomotopyPoint) -> np.ndarray:
        """The 4n x (4n+1) derivative [d/d(state) | d/d(mu)]."""
        self._check(p)
        return self._full_jacobian_raw(p.stacked())

    def limit_residual(self, x, w, z1, z2) -> np.ndarray:
        """Residual of the mu = 0 system the path converges to.

        Identical to `residual` at mu = 0; a zero of this system with
        x, w >= 0 gives a complementarity solution, with z1 and z2 free
        certificates annihilating x and w respectively.
        """
        u = np.concatenate(
            [
                np.asarray(x, dtype=float),
                np.asarray(w, dtype=float),
                np.asarray(z1, dtype=float),
                np.asarray(z2, dtype=float),
                [0.0],
            ]
        )
        if u.shape != (4 * self.n + 1,):
            raise ValueError("limit point components must each have length n")
        return self._residual_raw(u)
