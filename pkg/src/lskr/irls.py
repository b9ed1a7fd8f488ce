"""Nuclear-norm-regularized cloud recovery by iteratively reweighted solves.

The smoothed nuclear norm of the implicit feature matrix is driven down by
alternating two steps that touch only the N x N kernel matrix: a weight
update Q = (K + gamma I)^{-1/2}, and a Laplacian-regularized least-squares
solve whose graph weights combine kernel affinities with |Q|. A backtracking
step guarantees the surrogate objective

    F(X) = ||A(X) - b||^2 + lambda * trace(K(X) Q)

never increases across an outer iteration at fixed Q, regardless of how far
the linearized subproblem strays from the true surrogate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceWarning,
    IllPosedError,
    InvalidInputError,
    NumericalFailureError,
    UnsupportedError,
)
from .geometry import GaussianSpec, KernelSpec, PointCloud
from .kernels import GramMatrix, gram_matrix, median_pairwise_sigma, pairwise_kernel, realified
from .operators import FourierMaskOp, center_kspace_op, variable_density_masks


@dataclass(frozen=True)
class IrlsConfig:
    """Knobs of the alternating solver.

    ``gamma0``/``gamma_min`` are absolute when given; when None they default
    to 0.01 and 1e-8 times the largest kernel eigenvalue at initialization.
    ``kernel`` None selects a non-periodic Gaussian with sigma set to half
    the median pairwise distance of the initial cloud (image-scale rule).
    ``lambda_stage2`` applies to the frozen-Laplacian pass of the two-step
    protocol and falls back to ``lam``.
    """

    lam: float = 1e-3
    kernel: KernelSpec | None = GaussianSpec(sigma=0.15)
    gamma0: float | None = None
    gamma_decay: float = 2.0
    gamma_min: float | None = None
    outer_iters: int = 30
    cg_tol: float = 1e-8
    cg_max_iters: int = 800
    seed: int = 0
    lambda_stage2: float | None = None
    center_size: int = 9
    accel: float = 8.0

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidInputError("lambda must be nonnegative")
        if self.gamma_decay <= 1:
            raise InvalidInputError("gamma_decay must exceed 1")
        if self.outer_iters < 1:
            raise InvalidInputError("need at least one outer iteration")
        if self.cg_tol <= 0 or self.cg_max_iters < 1:
            raise InvalidInputError("invalid CG settings")


@dataclass
class IterRecord:
    """Per-iteration log row; the CSV export keeps the first five fields."""

    iteration: int
    data_term: float
    surrogate: float
    nuclear_estimate: float
    gamma: float
    objective_before: float = np.nan
    objective_after: float = np.nan
    step_scale: float = 1.0
    cg_converged: bool = True


@dataclass
class IrlsState:
    """Final iterate context plus the append-only history."""

    X: PointCloud
    Q: np.ndarray
    W: np.ndarray
    L: np.ndarray
    gamma: float
    history: list = field(default_factory=list)
    kernel: KernelSpec | None = None

    def history_to_csv(self, path) -> None:
        rows = np.array(
            [
                [r.iteration, r.data_term, r.surrogate, r.nuclear_estimate, r.gamma]
                for r in self.history
            ]
        )
        np.savetxt(
            path,
            rows,
            fmt=["%d", "%.17g", "%.17g", "%.17g", "%.17g"],
            delimiter=",",
            header="iter,data_term,surrogate,nuclear_estimate,gamma",
            comments="",
        )


def _gram_values(G) -> np.ndarray:
    return G.values if isinstance(G, GramMatrix) else np.asarray(G, dtype=float)


def q_update(G, gamma: float) -> np.ndarray:
    """Inverse square root (K + gamma I)^{-1/2} via eigendecomposition.

    Negative eigenvalues from roundoff are clipped at zero before the shift.
    """
    vals = _gram_values(G)
    if not np.all(np.isfinite(vals)):
        raise NumericalFailureError("kernel matrix contains non-finite entries")
    if gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    s, U = np.linalg.eigh(0.5 * (vals + vals.T))
    s = np.maximum(s, 0.0)
    Q = (U * (s + gamma) ** -0.5) @ U.T
    if not np.all(np.isfinite(Q)):
        raise NumericalFailureError("weight update produced non-finite entries")
    return 0.5 * (Q + Q.T)


def nuclear_norm_estimate(G, gamma: float = 0.0) -> float:
    """sum_i sqrt(s_i + gamma) over kernel eigenvalues; the smoothed norm."""
    if gamma < 0:
        raise InvalidInputError("gamma must be nonnegative")
    s = np.linalg.eigvalsh(_gram_values(G))
    return float(np.sum(np.sqrt(np.maximum(s, 0.0) + gamma)))


def surrogate_trace(X, Q: np.ndarray, spec: KernelSpec) -> float:
    """trace(K(X) Q) evaluated through kernel calls only."""
    K = gram_matrix(X, spec).values
    return float(np.sum(K * np.asarray(Q).T))


def build_laplacian(X, Q: np.ndarray, spec: GaussianSpec):
    """Graph weights W = -K o Q / sigma^2 (zero diagonal) and L = D - W.

    For the Gaussian kernel f'(t)/t = -f(t)/sigma^2, so the weight of a pair
    is -K_ij Q_ij / sigma^2; the off-diagonal entries of Q are negative for
    nearby points, which makes the dominant weights positive (attraction
    between similar points). Pairs with positive Q_ij get negative weights,
    so L is symmetric with L 1 = 0 but only approximately PSD; the solver's
    backtracking step, not the sign pattern, guarantees surrogate descent.
    Dirichlet kernels are rejected: their oscillation gives no usable
    f'(t)/t weighting.
    """
    if not isinstance(spec, GaussianSpec):
        raise UnsupportedError("Laplacian weights are defined for Gaussian kernels")
    K = gram_matrix(X, spec).values
    Qs = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)
    if Qs.shape != K.shape:
        raise InvalidInputError("Q must match the cloud size")
    W = -K * Qs / spec.sigma**2
    np.fill_diagonal(W, 0.0)
    W = 0.5 * (W + W.T)
    L = np.diag(W.sum(axis=1)) - W
    return W, L


def surrogate_gradient_check(X, Q: np.ndarray, spec: GaussianSpec, step: float = 1e-5) -> float:
    """Max deviation between the analytic trace gradient and central differences."""
    from .kernels import kernel_trace_gradient

    data = X.data if isinstance(X, PointCloud) else np.atleast_2d(np.asarray(X))
    if np.iscomplexobj(data):
        raise UnsupportedError("gradient check runs on real clouds")
    grad = kernel_trace_gradient(data, Q, spec)

    def h(mat):
        K = pairwise_kernel(realified(mat), spec)
        return float(np.sum(K * np.asarray(Q).T))

    worst = 0.0
    base = np.array(data, dtype=float)
    for i in range(base.shape[0]):
        for j in range(base.shape[1]):
            plus = base.copy()
            plus[i, j] += step
            minus = base.copy()
            minus[i, j] -= step
            fd = (h(plus) - h(minus)) / (2 * step)
            worst = max(worst, abs(fd - grad[i, j]))
    return worst


@dataclass
class SubproblemInfo:
    converged: bool
    iterations: int
    rel_residual: float


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def solve_subproblem(
    op,
    b,
    L: np.ndarray,
    lam: float,
    warm=None,
    cg_tol: float = 1e-8,
    cg_max_iters: int = 800,
):
    """Minimize ||A(X) - b||^2 + lam * trace(X L X^H) over n x N matrices.

    Identity operators admit the closed form X = B (I + lam L)^{-1}; any
    other operator goes through conjugate gradients on the normal equations
    T(X) = A*(A(X)) + lam X L = A*(b), warm-started and stopped at relative
    residual cg_tol. Returns (matrix, SubproblemInfo); on CG stagnation the
    best iterate is returned and a ConvergenceWarning is emitted.
    """
    bvec = np.asarray(b).ravel()
    Lmat = np.asarray(L, dtype=float)
    from .operators import IdentityOp

    if isinstance(op, IdentityOp):
        B = op.adjoint(bvec)
        if lam == 0:
            return B.copy(), SubproblemInfo(True, 0, 0.0)
        N = Lmat.shape[0]
        system = np.eye(N) + lam * Lmat
        X = np.linalg.solve(system, B.T).T
        return X, SubproblemInfo(True, 0, 0.0)

    rhs = op.adjoint(bvec)

    def T(M):
        out = op.adjoint(op.forward(M))
        if lam != 0:
            out = out + lam * (M @ Lmat)
        return out

    X = np.zeros_like(rhs) if warm is None else np.array(
        warm.data if isinstance(warm, PointCloud) else warm, dtype=rhs.dtype
    )
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        rhs_norm = 1.0
    R = rhs - T(X)
    P = R.copy()
    rs = _inner(R, R)
    best_X = X.copy()
    best_res = np.sqrt(rs)
    iters = 0
    for iters in range(1, cg_max_iters + 1):
        if np.sqrt(rs) <= cg_tol * rhs_norm:
            break
        TP = T(P)
        denom = _inner(P, TP)
        if denom <= 0:
            break
        alpha = rs / denom
        X = X + alpha * P
        R = R - alpha * TP
        rs_new = _inner(R, R)
        if np.sqrt(rs_new) < best_res:
            best_res = np.sqrt(rs_new)
            best_X = X.copy()
        P = R + (rs_new / rs) * P
        rs = rs_new
    rel = np.sqrt(rs) / rhs_norm
    if rel <= cg_tol or best_res / rhs_norm <= cg_tol:
        return (X if rel <= best_res / rhs_norm else best_X), SubproblemInfo(
            True, iters, float(min(rel, best_res / rhs_norm))
        )
    warnings.warn(
        f"CG stopped after {iters} iterations at relative residual {best_res / rhs_norm:.3e}",
        ConvergenceWarning,
    )
    return best_X, SubproblemInfo(False, iters, float(best_res / rhs_norm))


def _resolve_kernel(cfg: IrlsConfig, X0: np.ndarray) -> KernelSpec:
    if cfg.kernel is not None:
        return cfg.kernel
    sigma = median_pairwise_sigma(X0)
    return GaussianSpec(sigma=sigma, periodic=False)


def irls_recover(op, b, X0=None, cfg: IrlsConfig = IrlsConfig()):
    """Alternate weight updates and Laplacian solves; return (cloud, state).

    Initialization is the zero-filled adjoint A*(b) unless X0 is given. The
    feature matrix is never materialized: every step works through kernel
    evaluations on the current cloud.
    """
    bvec = np.asarray(b).ravel()
    if bvec.size == 0 and cfg.lam == 0:
        raise IllPosedError("no measurements and no regularization")
    X = np.array(X0.data if isinstance(X0, PointCloud) else X0) if X0 is not None else op.adjoint(bvec)
    spec = _resolve_kernel(cfg, X)

    G0 = gram_matrix(X, spec).values
    lam_max = float(np.linalg.eigvalsh(G0)[-1])
    lam_max = max(lam_max, np.finfo(float).tiny)
    gamma = cfg.gamma0 if cfg.gamma0 is not None else 0.01 * lam_max
    gamma_floor = cfg.gamma_min if cfg.gamma_min is not None else 1e-8 * lam_max

    def data_term(M):
        resid = op.forward(M) - bvec
        return float(np.real(np.vdot(resid, resid)))

    history: list[IterRecord] = []
    Q = W = L = None
    for it in range(1, cfg.outer_iters + 1):
        G = gram_matrix(X, spec)
        Q = q_update(G, gamma)
        f_old = data_term(X) + cfg.lam * float(np.sum(G.values * Q))
        W, L = build_laplacian(X, Q, spec)
        X_prop, info = solve_subproblem(
            op, bvec, L, cfg.lam, warm=X, cg_tol=cfg.cg_tol, cg_max_iters=cfg.cg_max_iters
        )
        # Backtrack toward the previous iterate until the true surrogate
        # (not its Laplacian linearization) has not increased.
        t = 1.0
        X_new = X_prop
        f_new = data_term(X_new) + cfg.lam * surrogate_trace(X_new, Q, spec)
        budget = 1e-12 * max(1.0, abs(f_old))
        while f_new > f_old + budget and t > 1e-7:
            t *= 0.5
            X_new = X + t * (X_prop - X)
            f_new = data_term(X_new) + cfg.lam * surrogate_trace(X_new, Q, spec)
        if f_new > f_old + budget:
            t = 0.0
            X_new = X
            f_new = f_old
        G_acc = gram_matrix(X_new, spec)
        history.append(
            IterRecord(
                iteration=it,
                data_term=data_term(X_new),
                surrogate=float(np.sum(G_acc.values * Q)),
                nuclear_estimate=nuclear_norm_estimate(G_acc, gamma),
                gamma=gamma,
                objective_before=f_old,
                objective_after=f_new,
                step_scale=t,
                cg_converged=info.converged,
            )
        )
        delta = np.linalg.norm(X_new - X) / max(np.linalg.norm(X), np.finfo(float).tiny)
        X = X_new
        gamma = max(gamma / cfg.gamma_decay, gamma_floor)
        if delta < 1e-6:
            break

    state = IrlsState(
        X=PointCloud(X),
        Q=Q,
        W=W,
        L=L,
        gamma=history[-1].gamma if history else gamma,
        history=history,
        kernel=spec,
    )
    return state.X, state


def two_step_recover(
    b_center,
    b_full,
    frame_shape,
    cfg: IrlsConfig,
    op_center=None,
    op_full=None,
    num_frames: int | None = None,
):
    """Estimate the Laplacian from center k-space, then solve once on full data.

    When the operators are not supplied they are rebuilt deterministically
    from the config: a centered ``center_size`` block for stage one and
    seeded variable-density masks at ``accel`` for stage two. Returns
    (recovered cloud, stage-one state); the stage-two Laplacian is the one
    rebuilt from the stage-one iterate.
    """
    h, w = frame_shape
    b_center = np.asarray(b_center).ravel()
    b_full = np.asarray(b_full).ravel()
    if op_center is None:
        per_frame = cfg.center_size**2
        if num_frames is None:
            if b_center.size % per_frame:
                raise InvalidInputError(
                    "cannot infer the frame count from the center measurements"
                )
            num_frames = b_center.size // per_frame
        op_center = center_kspace_op((h, w), cfg.center_size, num_frames)
    if op_full is None:
        masks = variable_density_masks(
            (h, w), op_center.N, cfg.accel, cfg.seed
        )
        op_full = FourierMaskOp(frame_shape=(h, w), masks=masks)

    X1, state = irls_recover(op_center, b_center, cfg=cfg)
    spec = state.kernel
    G = gram_matrix(X1.data, spec)
    Q = q_update(G, state.gamma)
    W, L = build_laplacian(X1.data, Q, spec)

    lam2 = cfg.lambda_stage2 if cfg.lambda_stage2 is not None else cfg.lam
    X2, info = solve_subproblem(
        op_full,
        b_full,
        L,
        lam2,
        warm=X1.data,
        cg_tol=cfg.cg_tol,
        cg_max_iters=cfg.cg_max_iters,
    )
    cloud = PointCloud(X2)
    final_state = IrlsState(
        X=cloud,
        Q=Q,
        W=W,
        L=L,
        gamma=state.gamma,
        history=state.history,
        kernel=state.kernel,
    )
    return cloud, final_state
