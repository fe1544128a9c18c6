"""Problem definitions, the bundled example corpus, and solution checking.

A complementarity instance is a tensor A of order m and an offset vector q;
a solution is x >= 0 with slack w = A x^(m-1) + q >= 0 and x.w = 0.  The
bundled corpus collects six small published instances with their structural
class labels and reported outcomes: five are solvable, while `example2` has
no finite solution (its second slack component is bounded below by 1, which
forces x2 = 0 and then w1 = -2) and is kept as a regression case for the
tracer's divergence handling.

For order 2 the problem is a linear complementarity problem, and
`lcp_brute_force` enumerates all complementary bases exactly; it is the
independent oracle the tracer is checked against on small instances.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import SingularMatrixError, lu_solve
from .tensor import Tensor, make_tensor

__all__ = [
    "ExpectedOutcome",
    "TcpProblem",
    "ComplementarityResidual",
    "verify",
    "corpus",
    "lcp_brute_force",
    "random_problem",
    "RNG_ALGORITHM",
]

logger = logging.getLogger(__name__)

# Generator used by random_problem, recorded so serialized problems can be
# re-derived across implementations that share the seed protocol.
RNG_ALGORITHM = "pcg64"


@dataclass(frozen=True)
class ExpectedOutcome:
    """Reported outcome for a corpus problem: final point and outcome kind."""

    x: np.ndarray
    w: np.ndarray
    kind: str  # "Solved" or "DivergedUnbounded"


@dataclass(frozen=True)
class TcpProblem:
    tensor: Tensor
    q: np.ndarray
    label: str | None = None
    expected: ExpectedOutcome | None = None
    name: str | None = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.shape != (self.tensor.dim,):
            raise ValueError(
                f"q must have length {self.tensor.dim}, got shape {q.shape}"
            )
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.tensor.dim

    @property
    def order(self) -> int:
        return self.tensor.order


@dataclass(frozen=True)
class ComplementarityResidual:
    """How far a candidate x is from solving the problem.

    All fields are nonnegative; a solution has all of them at zero.
    """

    x_negativity: float
    w_negativity: float
    gap: float
    per_component: np.ndarray

    @property
    def max_violation(self) -> float:
        return max(self.x_negativity, self.w_negativity, self.gap)


def verify(problem: TcpProblem, x) -> ComplementarityResidual:
    """Residual record for a candidate x, with w recomputed from the tensor."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"x must have length {problem.n}, got shape {x.shape}")
    w = problem.tensor.contract_vector(x) + problem.q
    return ComplementarityResidual(
        x_negativity=float(max(0.0, -x.min())),
        w_negativity=float(max(0.0, -w.min())),
        gap=float(abs(x @ w)),
        per_component=x * w,
    )


def corpus() -> list[TcpProblem]:
    """The six bundled small instances with labels and reported outcomes."""
    return [
        TcpProblem(
            make_tensor(4, 2, {(1, 1, 1, 2): -2.0, (2, 1, 1, 1): 1.0, (2, 2, 2, 2): 1.0}),
            q=[1.0, -1.0],
            label="column sufficient",
            expected=ExpectedOutcome(
                np.array([0.7937, 0.7937]), np.array([0.0, 0.0]), "Solved"
            ),
            name="example1",
        ),
        TcpProblem(
            make_tensor(
                3,
                2,
                {
                    (1, 1, 2): 1.0,
                    (1, 2, 1): 1.0,
                    (1, 2, 2): 1.0,
                    (2, 1, 2): 1.0,
                    (2, 2, 1): 1.0,
                    (2, 2, 2): 1.0,
                },
            ),
            q=[-2.0, 1.0],
            label="column competent",
            expected=ExpectedOutcome(
                # Reported end point of a divergent run: x1 grows without
                # bound with x1*x2 -> 1, and the recomputed slack tends to
                # (0, 3).  The point itself is not a solution (w1 = -2 at
                # x2 = 0); no finite solution exists.
                np.array([1697.278, 0.0]),
                np.array([0.0, 3.0]),
                "DivergedUnbounded",
            ),
            name="example2",
        ),
        TcpProblem(
            make_tensor(4, 2, {(1, 1, 1, 1): 1.0, (1, 1, 1, 2): -1.0, (2, 1, 1, 1): 1.0}),
            q=[1.0, -1.0],
            label="column adequate",
            expected=ExpectedOutcome(
                np.array([1.0, 2.0]), np.array([0.0, 0.0]), "Solved"
            ),
            name="example3",
        ),
        TcpProblem(
            make_tensor(
                4, 2, {(1, 1, 1, 1): 2.0, (1, 1, 1, 2): 1.0, (2, 1, 2, 2): 4.0, (2, 2, 2, 2): 2.0}
            ),
            q=[-1.0, -1.0],
            label="P0",
            expected=ExpectedOutcome(
                np.array([0.717516, 0.50706]), np.array([0.0, 0.0]), "Solved"
            ),
            name="example4",
        ),
        TcpProblem(
            make_tensor(
                3,
                2,
                {
                    (1, 1, 1): 1.0,
                    (1, 2, 1): 2.0,
                    (1, 2, 2): 1.0,
                    (2, 2, 2): 1.0,
                    (2, 1, 1): -1.0,
                    (2, 2, 1): -1.0,
                },
            ),
            q=[-1.5, 1.0],
            label="strictly semipositive (not strong strictly semipositive)",
            expected=ExpectedOutcome(
                np.array([0.901703, 0.3230419]), np.array([0.0, 0.0]), "Solved"
            ),
            name="example5",
        ),
        TcpProblem(
            make_tensor(
                3,
                2,
                {
                    (1, 1, 1): 1.0,
                    (1, 1, 2): -3.0,
                    (1, 2, 2): 1.0,
                    (2, 2, 2): 1.0,
                    (2, 1, 1): 1.0,
                    (2, 1, 2): -2.0,
                },
            ),
            q=[-2.0, -1.0],
            label="semipositive (neither strictly nor strong strictly semipositive)",
            expected=ExpectedOutcome(
                np.array([1.414214, 0.0]), np.array([0.0, 1.0]), "Solved"
            ),
            name="example6",
        ),
    ]


def lcp_brute_force(problem: TcpProblem, tol: float = 1e-9) -> list[np.ndarray]:
    """All solutions of an order-2 instance by complementary-basis enumeration.

    Every one of the 2^n partitions of indices into basic (w_i = 0) and
    nonbasic (x_i = 0) is tried; the induced linear system is solved for
    the basic x components and the candidate is kept when both x and the
    remaining slack are nonnegative.  Partitions with a singular basis
    submatrix are skipped.  Only intended for n <= 4.
    """
    if problem.order != 2:
        raise ValueError("brute-force enumeration requires an order-2 tensor")
    n = problem.n
    if n > 4:
        raise ValueError("brute-force enumeration is limited to n <= 4")
    mat = problem.tensor.data
    solutions = []
    for mask in range(2**n):
        basic = [i for i in range(n) if mask >> i & 1]
        x = np.zeros(n)
        if basic:
            sub = mat[np.ix_(basic, basic)]
            try:
                x[basic] = lu_solve(sub, -problem.q[basic])
            except SingularMatrixError:
                logger.debug("skipping singular basis %s", basic)
                continue
        w = mat @ x + problem.q
        if x.min() >= -tol and w.min() >= -tol:
            solutions.append(x)
    return solutions


def random_problem(order: int, dim: int, seed: int, entry_scale: float = 1.0) -> TcpProblem:
    """Deterministic unstructured instance for property testing.

    Tensor entries are uniform on [-entry_scale, entry_scale] and q is
    uniform on [-1, 1], both drawn from a pcg64 stream seeded with `seed`,
    so equal seeds give identical problems.
    """
    if not 2 <= order <= 4:
        raise ValueError("order must lie in 2..4")
    if not 1 <= dim <= 4:
        raise ValueError("dim must lie in 1..4")
    rng = np.random.Generator(np.random.PCG64(seed))
    data = rng.uniform(-entry_scale, entry_scale, size=(dim,) * order)
    q = rng.uniform(-1.0, 1.0, size=dim)
    return TcpProblem(
        Tensor(data),
        q=q,
        label=f"unstructured ({RNG_ALGORITHM} seed={seed})",
        name=f"random-{order}-{dim}-{seed}",
    )
