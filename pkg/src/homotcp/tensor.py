"""Dense real tensors and the multilinear contractions used by the solver.

An order-m, dimension-n tensor A acts on a vector x through repeated
contraction of its trailing indices:

    A x^m      = sum a[i1,...,im] * x[i1]*...*x[im]          (scalar)
    A x^(m-1)  = vector, component i sums over i2..im
    A x^(m-2)  = matrix, entry (i, j) sums over i3..im
    A x^(m-3)  = cube, entry (i, j, k) sums over i4..im

Contractions over an empty index range follow the empty-product convention,
so an order-2 tensor contracted to a matrix is just its coefficient matrix.

Index tuples at the public boundary are 1-based, matching the notation of
the complementarity literature the bundled problems come from; storage is a
0-based row-major numpy array.
"""

from __future__ import annotations

import math
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["Tensor", "SymmetrizedTensor", "make_tensor"]


def _contract_trailing(data: np.ndarray, x: np.ndarray, count: int) -> np.ndarray:
    """Contract the last `count` axes of `data` against the vector `x`."""
    out = data
    for _ in range(count):
        out = out @ x
    return out


class Tensor:
    """Immutable dense tensor of order >= 2 with all axes of equal length."""

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim < 2:
            raise ValueError("tensor order must be at least 2")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise ValueError(f"all axes must have the same length, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor coefficients must be finite")
        arr.setflags(write=False)
        self._data = arr

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Read-only coefficient array of shape (dim,) * order."""
        return self._data

    def entry(self, index: Sequence[int]) -> float:
        """Coefficient at a 1-based index tuple."""
        return float(self._data[tuple(i - 1 for i in index)])

    def _check_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {x.shape}")
        return x

    def contract_scalar(self, x) -> float:
        """A x^m, the full contraction against x."""
        x = self._check_vector(x)
        return float(_contract_trailing(self._data, x, self.order))

    def contract_vector(self, x) -> np.ndarray:
        """A x^(m-1), contracting all but the first index."""
        x = self._check_vector(x)
        return _contract_trailing(self._data, x, self.order - 1)

    def contract_matrix(self, x) -> np.ndarray:
        """A x^(m-2), contracting all but the first two indices."""
        x = self._check_vector(x)
        return _contract_trailing(self._data, x, self.order - 2)

    def contract_cube(self, x) -> np.ndarray:
        """A x^(m-3), contracting all but the first three indices.

        For order 2 there is no third index to keep; the result is defined
        as the zero cube, consistent with the (m-2) factor that multiplies
        it in every derivative formula vanishing there.
        """
        x = self._check_vector(x)
        if self.order == 2:
            return np.zeros((self.dim,) * 3)
        return _contract_trailing(self._data, x, self.order - 3)

    def symmetrized(self) -> "SymmetrizedTensor":
        """Average the coefficients over all permutations of indices 2..m.

        The resulting tensor generates the same map x -> A x^(m-1) but is
        symmetric in its trailing indices, which is what makes the closed
        forms for the derivatives of that map valid.  Every entry of an
        orbit receives the identical float (the average accumulated at the
        orbit's sorted representative), so trailing-index symmetry holds
        exactly, not just to roundoff.
        """
        m, n = self.order, self.dim
        acc = np.zeros_like(self._data)
        for perm in permutations(range(1, m)):
            acc = acc + np.transpose(self._data, (0, *perm))
        acc = acc / math.factorial(m - 1)
        out = np.empty_like(acc)
        from itertools import product as _product

        for idx in _product(range(n), repeat=m):
            out[idx] = acc[(idx[0], *sorted(idx[1:]))]
        return SymmetrizedTensor(out)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(
            self._data, other._data
        )

    def __repr__(self):
        return f"{type(self).__name__}(order={self.order}, dim={self.dim})"


class SymmetrizedTensor(Tensor):
    """Tensor produced by trailing-index symmetrization.

    Carries the extra guarantee that coefficients are invariant under any
    permutation of indices 2..m, so `map_jacobian` below is exact.
    """

    def map_jacobian(self, x) -> np.ndarray:
        """Jacobian of x -> A x^(m-1) for the source tensor A.

        Equals (m-1) * (self x^(m-2)); valid because self is trailing-index
        symmetric.
        """
        return (self.order - 1) * self.contract_matrix(x)


def make_tensor(
    order: int,
    dim: int,
    entries: Mapping[Sequence[int], float] | Iterable[tuple[Sequence[int], float]] = (),
) -> Tensor:
    """Build a dense tensor from a sparse list of (1-based index, value) pairs.

    Unlisted coefficients are zero.  Listing the same index tuple twice is
    an error rather than a silent overwrite.
    """
    if order < 2:
        raise ValueError("tensor order must be at least 2")
    if dim < 1:
        raise ValueError("tensor dimension must be at least 1")
    data = np.zeros((dim,) * order)
    pairs = entries.items() if isinstance(entries, Mapping) else entries
    seen = set()
    for index, value in pairs:
        index = tuple(int(i) for i in index)
        if len(index) != order:
            raise ValueError(f"index {index} does not have {order} components")
        if any(i < 1 or i > dim for i in index):
            raise ValueError(f"index {index} out of range 1..{dim}")
        if index in seen:
            raise ValueError(f"duplicate index {index}")
        if not np.isfinite(value):
            raise ValueError(f"non-finite value at index {index}")
        seen.add(index)
        data[tuple(i - 1 for i in index)] = value
    return Tensor(data)
