"""Dense primal-dual interior-point solver for second-order cone programs.

Solves the pair

    minimize    c'x                    maximize   -h'z - b'y
    subject to  G x + s = h            subject to G'z + A'y + c = 0
                A x = b                           z in C
                s in C

where C is a product of nonnegative orthants and second-order cones
``{(u0, u1) : u0 >= ||u1||}``.  The iteration works on the homogeneous
self-dual embedding, so infeasible problems end with a certificate instead
of running out of iterations.  Search directions use Nesterov-Todd scaling
and a Mehrotra predictor-corrector.

The iteration itself is compiled with numba (``_ipmcore``); this module
holds the problem types, validation and an independent residual check.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _conekernels as _k
from . import _ipmcore as _ipm

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
REGULARIZATION = 1e-9
STEP_FRACTION = 0.99
REFINE_STEPS = 1
# accepted infeasibility ray when the iteration stops before reaching tol
FALLBACK_CERT_TOL = 1e-6


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class NonNeg:
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("NonNeg block length must be >= 1")


@dataclass(frozen=True)
class SecondOrder:
    """``u[0] >= ||u[1:]||``."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("SecondOrder block dimension must be >= 1")


Block = Union[NonNeg, SecondOrder]


@dataclass(frozen=True)
class ConeSpec:
    """Ordered cone blocks laid out consecutively in the slack vector."""

    blocks: tuple

    def __init__(self, blocks: Sequence[Block]):
        blocks = tuple(blocks)
        for b in blocks:
            if not isinstance(b, (NonNeg, SecondOrder)):
                raise TypeError(f"unknown cone block {b!r}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        return sum(b.length if isinstance(b, NonNeg) else b.dim for b in self.blocks)

    @property
    def degree(self) -> int:
        return sum(b.length if isinstance(b, NonNeg) else 1 for b in self.blocks)


@dataclass(frozen=True)
class ConeProblem:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    cones: ConeSpec
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).ravel()
        n = c.size
        if G.shape != (h.size, n):
            raise ValueError(f"G has shape {G.shape}, expected ({h.size}, {n})")
        if self.cones.dim != h.size:
            raise ValueError(f"cone dimension {self.cones.dim} != slack dimension {h.size}")
        if self.A is None:
            A = np.zeros((0, n))
            b = np.zeros(0)
        else:
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            b = np.asarray(self.b, dtype=float).ravel()
            if A.shape != (b.size, n):
                raise ValueError(f"A has shape {A.shape}, expected ({b.size}, {n})")
        for name, arr in (("c", c), ("G", G), ("h", h), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_var(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class Residuals:
    primal: float
    dual: float
    gap: float

    def max(self) -> float:
        return max(self.primal, self.dual, self.gap)


@dataclass(frozen=True)
class ConeSolution:
    """Solver output.

    ``x`` and ``s`` are the primal variables and slacks, ``y`` and ``z`` the
    multipliers of the equality and cone constraints.  For infeasible
    statuses the vectors hold the certificate: ``(y, z)`` with
    ``h'z + b'y = -1`` for PrimalInfeasible, ``(x, s)`` with ``c'x = -1``
    for DualInfeasible, and ``certificate_violation`` is the norm of the
    residual that the ray should make zero.
    """

    status: Status
    x: np.ndarray
    s: np.ndarray
    y: np.ndarray
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    residuals: Residuals
    iterations: int
    certificate_violation: float = float("nan")

    @property
    def objective(self) -> float:
        return self.primal_objective


# -- cone algebra -------------------------------------------------------------


class _Cones:
    """Index layout of a ConeSpec in the form the compiled kernels take."""

    def __init__(self, spec: ConeSpec):
        lidx, qs, qd = [], [], []
        pos = 0
        for b in spec.blocks:
            if isinstance(b, NonNeg):
                lidx.extend(range(pos, pos + b.length))
                pos += b.length
            else:
                qs.append(pos)
                qd.append(b.dim)
                pos += b.dim
        self.m = pos
        self.lidx = np.asarray(lidx, dtype=np.int64)
        self.qs = np.asarray(qs, dtype=np.int64)
        self.qd = np.asarray(qd, dtype=np.int64)
        self.degree = spec.degree

    def min_eig(self, u: np.ndarray) -> float:
        return float(_k.min_eig(u, self.lidx, self.qs, self.qd))


@functools.lru_cache(maxsize=64)
def _layout(spec: ConeSpec) -> _Cones:
    return _Cones(spec)


# -- residuals ----------------------------------------------------------------


def _cone_violation(cones: _Cones, u: np.ndarray) -> float:
    return max(0.0, -cones.min_eig(u))


def _norm(v) -> float:
    return float(np.linalg.norm(v)) if np.size(v) else 0.0


def kkt_residuals(p: ConeProblem, sol: ConeSolution, relative: bool = True) -> Residuals:
    """KKT residuals of a primal-dual pair, recomputed from scratch.

    primal: equality / slack residual and slack cone violation,
    dual: stationarity residual and multiplier cone violation,
    gap: complementarity and duality gap.
    With ``relative`` (the default, and the measure the solver's tolerance
    refers to) each is divided by max(1, norm of the matching data).
    """
    cones = _Cones(p.cones)
    x, s, y, z = (np.asarray(v, dtype=float) for v in (sol.x, sol.s, sol.y, sol.z))
    if y.size != p.b.size:
        y = np.zeros(p.b.size)
    nb, nh, nc = max(1.0, _norm(p.b)), max(1.0, _norm(p.h)), max(1.0, _norm(p.c))
    if not relative:
        nb = nh = nc = 1.0
    primal = max(
        _norm(p.A @ x - p.b) / nb,
        _norm(p.G @ x + s - p.h) / nh,
        _cone_violation(cones, s) / nh,
    )
    dual = max(_norm(p.G.T @ z + p.A.T @ y + p.c) / nc, _cone_violation(cones, z) / nc)
    pobj = float(p.c @ x)
    dobj = float(-p.h @ z - p.b @ y)
    gap = max(abs(float(s @ z)), abs(pobj - dobj))
    if relative:
        gap /= max(1.0, abs(pobj))
    return Residuals(primal, dual, gap)


# -- driver -------------------------------------------------------------------

_STATUS_CODES = {
    _ipm.OPTIMAL: Status.OPTIMAL,
    _ipm.PRIMAL_INFEASIBLE: Status.PRIMAL_INFEASIBLE,
    _ipm.DUAL_INFEASIBLE: Status.DUAL_INFEASIBLE,
    _ipm.MAX_ITERATIONS: Status.MAX_ITERATIONS,
    _ipm.NUMERICAL_FAILURE: Status.NUMERICAL_FAILURE,
}


def solve_socp(p: ConeProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ConeSolution:
    """Solve a cone program; see the module docstring for the problem form.

    Parameters
    ----------
    p : ConeProblem
    tol : float
        Bound on the relative primal, dual and gap residuals at an
        ``Optimal`` return, and on the certificate residual for the
        infeasible statuses.
    max_iter : int

    Returns
    -------
    ConeSolution
        ``NumericalFailure`` means the linear algebra broke down; it says
        nothing about feasibility.  If the iteration stops early (breakdown
        or ``max_iter``) after meeting an infeasibility ray with relative
        violation at most ``max(tol, FALLBACK_CERT_TOL)``, the result is
        ``PrimalInfeasible`` with that ray and its measured violation.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    cones = _layout(p.cones)
    code, x, s, y, z, scale, it, primal, dual, gap, viol = _ipm.ipm(
        p.c, p.G, p.h, p.A, p.b, cones.lidx, cones.qs, cones.qd, cones.degree,
        float(tol), int(max_iter), REGULARIZATION, STEP_FRACTION, REFINE_STEPS,
        max(float(tol), FALLBACK_CERT_TOL),
    )
    status = _STATUS_CODES[code]
    res = Residuals(primal, dual, gap)
    nan, inf = float("nan"), float("inf")
    if status == Status.PRIMAL_INFEASIBLE:
        return ConeSolution(
            status=status, x=np.full(x.size, nan), s=np.full(s.size, nan),
            y=y / scale, z=z / scale, primal_objective=inf, dual_objective=inf,
            residuals=res, iterations=it, certificate_violation=viol,
        )
    if status == Status.DUAL_INFEASIBLE:
        return ConeSolution(
            status=status, x=x / scale, s=s / scale,
            y=np.full(y.size, nan), z=np.full(z.size, nan),
            primal_objective=-inf, dual_objective=-inf,
            residuals=res, iterations=it, certificate_violation=viol,
        )
    if status == Status.NUMERICAL_FAILURE:
        return ConeSolution(status=status, x=x, s=s, y=y, z=z, primal_objective=nan,
                            dual_objective=nan, residuals=res, iterations=it)
    return ConeSolution(
        status=status, x=x / scale, s=s / scale, y=y / scale, z=z / scale,
        primal_objective=float(p.c @ x) / scale,
        dual_objective=-float(p.b @ y + p.h @ z) / scale,
        residuals=res, iterations=it,
    )
