"""Homotopy continuation solver for tensor complementarity problems.

Find x >= 0 with w = A x^(m-1) + q >= 0 and x.w = 0 for a dense order-m
tensor A, by tracing the bounded root curve of a four-block homotopy map
from a strictly positive anchor at mu = 1 down to mu = 0 with a
predictor-corrector method.

Typical use:

    >>> import homotcp
    >>> problem = homotcp.corpus()[0]
    >>> report = homotcp.solve(problem)
    >>> report.status.value
    'Solved'
"""

from .homotopy import Anchor, HomotopyMap, HomotopyPoint
from .linalg import (
    SingularMatrixError,
    det_sign,
    euclidean_norm,
    lu_solve,
    pinv_right_apply,
)
from .problems import (
    ComplementarityResidual,
    ExpectedOutcome,
    TcpProblem,
    corpus,
    lcp_brute_force,
    random_problem,
    verify,
)
from .tensor import SymmetrizedTensor, Tensor, make_tensor
from .tracer import (
    PathTrace,
    SolveReport,
    Status,
    TraceRecord,
    TracerConfig,
    predictor_corrector_cycle,
    solution_extract,
    tangent,
    trace_path,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "ComplementarityResidual",
    "ExpectedOutcome",
    "HomotopyMap",
    "HomotopyPoint",
    "PathTrace",
    "SingularMatrixError",
    "SolveReport",
    "Status",
    "SymmetrizedTensor",
    "Tensor",
    "TcpProblem",
    "TraceRecord",
    "TracerConfig",
    "corpus",
    "default_anchor_basket",
    "det_sign",
    "euclidean_norm",
    "lcp_brute_force",
    "lu_solve",
    "make_tensor",
    "pinv_right_apply",
    "predictor_corrector_cycle",
    "random_problem",
    "solve",
    "solution_extract",
    "tangent",
    "trace_path",
    "verify",
]


def default_anchor_basket(n: int) -> list[Anchor]:
    """Deterministic anchors tried in order by `solve`.

    The root curve depends on the anchor, and the guarantees behind the
    method hold for almost every strictly positive one; when the curve from
    the all-ones anchor exits the feasible region or stalls, another anchor
    usually carries a curve all the way to the solution.  The basket is the
    all-ones anchor first, two rescalings, and five fixed pseudo-random
    positive anchors.
    """
    import numpy as np

    basket = [
        Anchor.ones(n),
        Anchor.from_stacked(np.full(4 * n, 0.5)),
        Anchor.from_stacked(np.full(4 * n, 2.0)),
    ]
    rng = np.random.Generator(np.random.PCG64(20240901))
    for _ in range(5):
        basket.append(Anchor.from_stacked(rng.uniform(0.3, 3.0, size=4 * n)))
    return basket


def solve(
    problem: TcpProblem,
    config: TracerConfig | None = None,
    anchor: Anchor | None = None,
    keep_trace: bool = True,
) -> SolveReport:
    """Trace the homotopy path for a problem and report the outcome.

    With an explicit `anchor` a single path is traced from it.  Otherwise
    the anchors from `default_anchor_basket` are tried in order and the
    first solved report wins; if none solves, the report of the first
    (all-ones) anchor is returned.
    """
    if anchor is not None:
        hmap = HomotopyMap(problem.tensor, problem.q, anchor)
        return trace_path(hmap, config, keep_trace=keep_trace)
    first = None
    for a in default_anchor_basket(problem.n):
        hmap = HomotopyMap(problem.tensor, problem.q, a)
        report = trace_path(hmap, config, keep_trace=keep_trace)
        if first is None:
            first = report
        if report.solved:
            return report
    return first
