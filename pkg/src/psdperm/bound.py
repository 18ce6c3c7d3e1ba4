"""Concave variational upper bound on the permanent of a PSD matrix.

Given a Gram factor ``A = V V^dagger`` with rows ``v_i`` (``n`` rows,
rank ``d``), the objective

    phi(X) = sum_i log(v_i^dagger X v_i) + log det X - tr X + d

is concave over the Hermitian positive definite cone, and its maximum
``Phi(A)`` certifies the two-sided bound

    exp(Phi(A) - gamma * n)  <=  per(A)  <=  exp(Phi(A)),

where ``gamma`` is the Euler-Mascheroni constant.  The maximizer obeys
``tr X* = n + d``, which is monitored as a convergence diagnostic.

The maximization runs a damped Newton method on the real coordinates of
the Hermitian matrix space (an orthonormal basis: diagonal entries, then
sqrt(2) * real and imaginary parts of the upper triangle).  Steps are
kept feasible by Cholesky checks and an Armijo backtracking line search.
Near the optimum the predicted Armijo gain can drop below the floating
point resolution of the objective; the search then switches to accepting
steps on a strict decrease of the gradient norm, which remains resolvable
long after objective comparisons saturate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotHermitianError, NotPositiveDefiniteError, ZeroRowError
from .gram import GramFactor, as_complex_matrix

__all__ = [
    "GAMMA",
    "PDPoint",
    "SolverOptions",
    "BoundResult",
    "objective",
    "gradient",
    "solve",
    "certified_interval",
    "bound_with_epsilon",
    "bound_permanent",
]

#: Euler-Mascheroni constant; the per-row price of the lower bound.
GAMMA = float(np.euler_gamma)

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class PDPoint:
    """Hermitian positive definite matrix with a cached Cholesky factor."""

    matrix: np.ndarray
    chol: np.ndarray  # lower triangular, matrix = chol @ chol^H

    @classmethod
    def from_matrix(cls, X, herm_tol: float = 1e-10) -> "PDPoint":
        """Validate and wrap a matrix, raising if it is not Hermitian PD."""
        X = as_complex_matrix(X)
        scale = float(np.max(np.abs(X)))
        defect = float(np.max(np.abs(X - X.conj().T)))
        if defect > herm_tol * max(1.0, scale):
            raise NotHermitianError(
                f"Hermitian defect {defect:.3e} exceeds {herm_tol:.1e}"
            )
        Xh = (X + X.conj().T) / 2.0
        try:
            L = np.linalg.cholesky(Xh)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(str(exc)) from None
        Xh.setflags(write=False)
        L.setflags(write=False)
        return cls(matrix=Xh, chol=L)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.real(np.diag(self.chol)))))


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the damped Newton maximizer.

    ``init_scale="trace_normalized"`` starts at ``((n+d)/d) * I`` so the
    iterate already satisfies the optimal trace; ``"identity"`` starts
    at ``I``.  The stall rule stops when the objective has improved by
    less than `stall_tol` over the last `stall_window` iterations.
    """

    grad_tol: float = 1e-9
    max_iters: int = 500
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60
    init_scale: str = "trace_normalized"
    stall_window: int = 5
    stall_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class BoundResult:
    """Outcome of the bound computation.

    ``log_lower = phi - gamma * n`` and ``log_upper = phi`` bracket
    ``log per(A)`` whenever the solver converged.  `status` is one of
    ``converged``, ``max_iters``, ``stalled``, ``no_progress``, or
    ``zero_diagonal`` (sentinel: the permanent is exactly zero and
    ``phi = -inf``).
    """

    phi: float
    x_star: PDPoint | None
    iterations: int
    grad_norm: float
    trace_residual: float
    log_lower: float
    log_upper: float
    gamma: float
    converged: bool
    status: str
    objective_history: np.ndarray
    n: int
    d: int


def _quadratic_forms(V: np.ndarray, X: np.ndarray) -> np.ndarray:
    """q_i = v_i^dagger X v_i (real for Hermitian X)."""
    return np.real(np.einsum("ij,jk,ik->i", V.conj(), X, V))


def _check_rows(factor: GramFactor) -> None:
    if np.any(factor.row_norms_sq <= 0.0):
        raise ZeroRowError(
            "Gram factor has a zero row; the permanent is exactly zero "
            "and must be short-circuited by the caller"
        )


def objective(factor: GramFactor, point) -> float:
    """Evaluate ``phi`` at a positive definite point.

    `point` may be a `PDPoint` or a raw Hermitian PD matrix.  Returns
    ``-inf`` if any quadratic form ``v_i^dagger X v_i`` underflows to a
    nonpositive value, which keeps infeasible line-search trials
    comparable without raising.
    """
    if not isinstance(point, PDPoint):
        point = PDPoint.from_matrix(point)
    _check_rows(factor)
    q = _quadratic_forms(factor.matrix, point.matrix)
    if np.min(q) <= 0.0:
        return float("-inf")
    d = point.d
    return float(np.sum(np.log(q)) + point.log_det - np.real(np.trace(point.matrix)) + d)


def gradient(factor: GramFactor, point) -> np.ndarray:
    """Euclidean gradient ``sum_i v_i v_i^dagger / q_i + X^{-1} - I``.

    Returned exactly Hermitian (symmetrized).  At the maximizer this is
    zero, which forces ``tr X* = n + d``.
    """
    if not isinstance(point, PDPoint):
        point = PDPoint.from_matrix(point)
    _check_rows(factor)
    V = factor.matrix
    d = point.d
    q = _quadratic_forms(V, point.matrix)
    Xinv = sla.cho_solve((np.asarray(point.chol), True), np.eye(d, dtype=complex))
    G = (V.T * (1.0 / q)) @ V.conj() + Xinv - np.eye(d)
    return (G + G.conj().T) / 2.0


def _herm_to_real(H: np.ndarray) -> np.ndarray:
    """Coordinates of a Hermitian matrix in the orthonormal real basis."""
    d = H.shape[0]
    iu, ju = np.triu_indices(d, k=1)
    return np.concatenate(
        [
            np.real(np.diag(H)),
            np.sqrt(2.0) * np.real(H[iu, ju]),
            np.sqrt(2.0) * np.imag(H[iu, ju]),
        ]
    )


def _herm_to_real_batch(Hs: np.ndarray) -> np.ndarray:
    """Vectorized `_herm_to_real` over a stack of shape (m, d, d)."""
    d = Hs.shape[1]
    idx = np.arange(d)
    iu, ju = np.triu_indices(d, k=1)
    return np.concatenate(
        [
            np.real(Hs[:, idx, idx]),
            np.sqrt(2.0) * np.real(Hs[:, iu, ju]),
            np.sqrt(2.0) * np.imag(Hs[:, iu, ju]),
        ],
        axis=1,
    )


def _real_to_herm(h: np.ndarray, d: int) -> np.ndarray:
    """Inverse of `_herm_to_real`."""
    iu, ju = np.triu_indices(d, k=1)
    H = np.zeros((d, d), dtype=complex)
    H[np.arange(d), np.arange(d)] = h[:d]
    m = d * (d - 1) // 2
    off = (h[d : d + m] + 1j * h[d + m :]) / np.sqrt(2.0)
    H[iu, ju] = off
    H[ju, iu] = off.conj()
    return H


def _negative_hessian(V: np.ndarray, q: np.ndarray, Xinv: np.ndarray) -> np.ndarray:
    """Matrix of ``-Hess phi`` in the orthonormal real basis.

    The log-term block is ``sum_i p_i p_i^T / q_i^2`` with
    ``p_i = coords(v_i v_i^dagger)``; the log-det block maps the basis
    element ``E`` to ``X^{-1} E X^{-1}``, assembled column by column
    from outer products of the columns of ``X^{-1}``.  Both blocks are
    symmetric PSD, and the sum is positive definite on the feasible set.
    """
    d = Xinv.shape[0]
    iu, ju = np.triu_indices(d, k=1)

    P = _herm_to_real_batch(np.einsum("ia,ib->iab", V, V.conj()))
    Pw = P / q[:, None]
    A = Pw.T @ Pw

    S = Xinv  # columns s_k
    diag_block = np.einsum("ik,jk->kij", S, S.conj())
    SI = S[:, iu]
    SJ = S[:, ju]
    cross = np.einsum("ip,jp->pij", SI, SJ.conj())
    cross_t = np.einsum("ip,jp->pij", SJ, SI.conj())
    re_block = (cross + cross_t) / np.sqrt(2.0)
    im_block = 1j * (cross - cross_t) / np.sqrt(2.0)
    K = _herm_to_real_batch(np.concatenate([diag_block, re_block, im_block])).T
    return A + K


def _try_chol(X: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return None


def _objective_from_parts(V, X, chol, d) -> float:
    q = _quadratic_forms(V, X)
    if np.min(q) <= 0.0:
        return float("-inf")
    logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
    return float(np.sum(np.log(q)) + logdet - np.real(np.trace(X)) + d)


def solve(factor: GramFactor, options: SolverOptions | None = None) -> BoundResult:
    """Maximize the concave objective over the positive definite cone.

    Returns a `BoundResult` with the certified interval endpoints in
    log domain.  On non-convergence the best iterate found is still
    returned, with ``converged=False`` and a diagnostic `status`.

    Raises
    ------
    ZeroRowError
        If the factor has a zero row (the permanent is exactly zero;
        callers should use `bound_permanent`, which short-circuits).
    """
    opts = options if options is not None else SolverOptions()
    _check_rows(factor)
    V = factor.matrix
    n, d = V.shape

    if opts.init_scale == "trace_normalized":
        X = ((n + d) / d) * np.eye(d, dtype=complex)
    elif opts.init_scale == "identity":
        X = np.eye(d, dtype=complex)
    else:
        raise ValueError(f"unknown init_scale: {opts.init_scale!r}")

    chol = np.linalg.cholesky(X)
    f = _objective_from_parts(V, X, chol, d)
    history = [f]

    def grad_state(X, chol):
        q = _quadratic_forms(V, X)
        Xinv = sla.cho_solve((chol, True), np.eye(d, dtype=complex))
        G = (V.T * (1.0 / q)) @ V.conj() + Xinv - np.eye(d)
        G = (G + G.conj().T) / 2.0
        g = _herm_to_real(G)
        return q, Xinv, g, float(np.linalg.norm(g))

    q, Xinv, g, gnorm = grad_state(X, chol)
    iterations = 0
    status = "max_iters"

    while iterations < opts.max_iters:
        if gnorm <= opts.grad_tol:
            status = "converged"
            break

        # Newton direction from the negative Hessian; fall back to the
        # gradient if the factorization fails or the direction is not
        # an ascent direction.
        delta = None
        H = _negative_hessian(V, q, Xinv)
        try:
            cf = sla.cho_factor(H)
            delta = sla.cho_solve(cf, g)
        except (np.linalg.LinAlgError, ValueError):
            delta = None
        if delta is None or not np.all(np.isfinite(delta)) or float(g @ delta) <= 0.0:
            delta = g
        dd = float(g @ delta)

        # When the predicted Armijo gain is below the resolution of the
        # objective, accept on a strict gradient-norm decrease instead.
        tail = opts.armijo_c * dd <= 16.0 * _EPS * max(1.0, abs(f))
        floor = f - 16.0 * _EPS * max(1.0, abs(f))

        D = _real_to_herm(delta, d)
        t = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            Xt = X + t * D
            Xt = (Xt + Xt.conj().T) / 2.0
            cholt = _try_chol(Xt)
            if cholt is not None:
                ft = _objective_from_parts(V, Xt, cholt, d)
                if np.isfinite(ft):
                    if not tail:
                        if ft >= f + opts.armijo_c * t * dd:
                            accepted = True
                    else:
                        qt, Xinvt, gt, gnt = grad_state(Xt, cholt)
                        if gnt < gnorm and ft >= floor:
                            accepted = True
                            q, Xinv, g, gnorm = qt, Xinvt, gt, gnt
                    if accepted:
                        X, chol, f = Xt, cholt, ft
                        break
            t *= opts.backtrack_factor
        iterations += 1

        if not accepted:
            status = "no_progress"
            break
        if not tail:
            q, Xinv, g, gnorm = grad_state(X, chol)
        history.append(f)

        if (
            len(history) > opts.stall_window
            and history[-1] - history[-1 - opts.stall_window] < opts.stall_tol
            and gnorm > opts.grad_tol
        ):
            status = "stalled"
            break
    else:
        status = "max_iters"

    if gnorm <= opts.grad_tol:
        status = "converged"

    X.setflags(write=False)
    chol.setflags(write=False)
    point = PDPoint(matrix=X, chol=chol)
    trace_residual = abs(float(np.real(np.trace(X))) - (n + d))
    return BoundResult(
        phi=f,
        x_star=point,
        iterations=iterations,
        grad_norm=gnorm,
        trace_residual=trace_residual,
        log_lower=f - GAMMA * n,
        log_upper=f,
        gamma=GAMMA,
        converged=(status == "converged"),
        status=status,
        objective_history=np.asarray(history),
        n=n,
        d=d,
    )


def certified_interval(phi: float, n: int) -> tuple:
    """Two-sided bracket ``(phi - gamma*n, phi)`` for ``log per(A)``."""
    if np.isnan(phi):
        raise ValueError("phi must not be NaN")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (phi - GAMMA * n, phi)


def bound_with_epsilon(phi_tilde: float, n: int, eps: float) -> float:
    """Inflate an eps-approximate maximum into a true upper bound.

    If ``phi_tilde >= Phi(A) - eps * n / 2`` then
    ``phi_tilde + eps * n / 2 >= Phi(A)``, so the returned value is a
    valid log upper bound regardless of which side ``phi_tilde`` errs on.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return phi_tilde + 0.5 * eps * n


def bound_permanent(matrix, tolerances=None, options: SolverOptions | None = None) -> BoundResult:
    """Validate, factor, and bound in one call.

    A zero diagonal entry forces ``per(A) = 0``; in that case a sentinel
    result with ``phi = -inf`` (status ``zero_diagonal``) is returned
    and no optimization runs.
    """
    from .gram import gram_factor, validate_hermitian_psd

    psd = validate_hermitian_psd(matrix, tolerances)
    if psd.zero_diagonal_indices:
        neg_inf = float("-inf")
        return BoundResult(
            phi=neg_inf,
            x_star=None,
            iterations=0,
            grad_norm=0.0,
            trace_residual=0.0,
            log_lower=neg_inf,
            log_upper=neg_inf,
            gamma=GAMMA,
            converged=True,
            status="zero_diagonal",
            objective_history=np.asarray([]),
            n=psd.n,
            d=psd.rank,
        )
    factor = gram_factor(psd)
    return solve(factor, options)
