"""Kernel-space one-versus-none solver.

Every class weight vector is a combination of mapped training patterns,
w_k = sum_i A[k, i] phi(x_i), so all computation runs through the Gram
matrix.  The surrogate system mirrors the linear assembly with the
augmented Gram column [g_i; 1] in place of the augmented pattern, blocks
of size N + 1 per class, and the hard weight constraint becomes
sum_k A[k, i] = 0 for every pattern i.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import MaxItersExceeded
from .kernels import DEFAULT_RIDGE, GramMatrix, KernelSpec, gram, gram_cross
from .linear import (
    AssembledSystem,
    ConstraintMode,
    Hyperparameters,
    _bias_indicator,
    _constraint_columns,
    _solve_reduced,
    _validate_fit_inputs,
)
from .majorization import MMState, hinge, majorizer

# Same field layout as the linear system; blocks are (N + 1)-sized.
KernelAssembledSystem = AssembledSystem


@dataclass
class TrainedKernelModel:
    """Fit result: coefficient rows A (K x N), biases, and kernel context.

    Retains the training features because prediction needs kernel values
    against them.  Diagnostics mirror TrainedLinearModel.
    """

    A: np.ndarray
    b: np.ndarray
    kernel: KernelSpec
    train_features: np.ndarray
    mode: ConstraintMode
    hyperparameters: Hyperparameters
    iterations_used: int
    final_objective: float
    kkt_residual: float
    ridge: float = DEFAULT_RIDGE
    converged: bool = True
    surrogate_trace: list = field(default_factory=list)
    hinge_trace: list = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return self.A.shape[0]

    @property
    def n_train(self) -> int:
        return self.A.shape[1]

    def decision_scores(self, X) -> np.ndarray:
        """Per-class scores sum_i A[k,i] kappa(x_i, x) + b_k, shape (T, K)."""
        cross = gram_cross(self.kernel, self.train_features, X)
        return cross.T @ self.A.T + self.b


def assemble_kernel(
    dataset: Dataset,
    gram_matrix: GramMatrix,
    mode: ConstraintMode,
    hp: Hyperparameters,
    state: MMState,
) -> KernelAssembledSystem:
    """Build the kernel surrogate system for the current auxiliaries.

    ``hp.alpha`` plays the pairwise coupling role here.  Blocks are sized
    N + 1; the trailing coordinate of each block is the class bias.
    """
    G = gram_matrix.values
    N = G.shape[0]
    K = dataset.n_classes
    P = N + 1
    L = K * P

    G0 = np.zeros((P, P))
    G0[:N, :N] = G

    H = np.zeros((L, L))
    rhs = np.zeros(L)
    for k, idx in enumerate(dataset.class_index_sets()):
        # rows are the augmented Gram columns [g_i; 1] of the class positives
        Ga = np.column_stack([G[:, idx].T, np.ones(idx.size)])
        a = 1.0 / state.z[k]
        s = slice(k * P, (k + 1) * P)
        H[s, s] = G0 + (hp.beta / 4.0) * (Ga.T * a) @ Ga
        rhs[s] = (hp.beta / 2.0) * ((1.0 + a) @ Ga)

    if mode.w_constraint == "soft":
        for k in range(K):
            for l in range(k + 1, K):
                sk = slice(k * P, (k + 1) * P)
                sl = slice(l * P, (l + 1) * P)
                H[sk, sl] += (hp.alpha / 2.0) * G0
                H[sl, sk] += (hp.alpha / 2.0) * G0
    if mode.b_constraint == "soft":
        u = _bias_indicator(K, P)
        H += hp.gamma * np.outer(u, u)

    return KernelAssembledSystem(
        H=H,
        rhs=rhs,
        constraint_matrix=_constraint_columns(mode, K, P),
        note=f"theta={hp.alpha}, ridge={gram_matrix.ridge}, mode={mode.token}",
    )


def _kernel_regularizer(G, A, b, mode, hp, half):
    AG = A @ G
    quads = np.einsum("ki,ki->k", AG, A)
    val = 0.5 * float(quads.sum()) if half else float(quads.sum())
    if mode.w_constraint == "soft":
        s = A.sum(axis=0)
        pair = 0.5 * (float(s @ G @ s) - float(quads.sum()))
        val += hp.alpha * pair
    if mode.b_constraint == "soft":
        val += hp.gamma * float(b.sum()) ** 2
    return val


def _kernel_hinge_sum(dataset, G, A, b):
    scores = (A @ G).T + b
    total = 0.0
    for k, idx in enumerate(dataset.class_index_sets()):
        total += float(np.sum(hinge(scores[idx, k])))
    return total


def training_objective_kernel(
    dataset: Dataset,
    gram_matrix: GramMatrix,
    A,
    b,
    mode: ConstraintMode,
    hp: Hyperparameters,
) -> float:
    """Kernel-space value of the functional the solver minimizes."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    G = gram_matrix.values
    return _kernel_regularizer(G, A, b, mode, hp, half=False) + hp.beta * (
        _kernel_hinge_sum(dataset, G, A, b)
    )


def fit_kernel(
    dataset: Dataset,
    kernel: KernelSpec,
    mode: ConstraintMode,
    hp: Hyperparameters,
    ridge: float = DEFAULT_RIDGE,
) -> TrainedKernelModel:
    """Fit the kernel model; same alternation as the linear path.

    Parameters
    ----------
    dataset : Dataset
    kernel : KernelSpec
    mode : ConstraintMode
    hp : Hyperparameters
        ``hp.alpha`` is the coupling coefficient of soft-w modes.
    ridge : float
        Jitter added to the Gram diagonal so the factorization survives
        duplicate patterns.

    Returns
    -------
    TrainedKernelModel
    """
    _validate_fit_inputs(dataset, mode, hp)
    gm = gram(kernel, dataset.features, ridge)
    G = gm.values
    N = G.shape[0]
    K = dataset.n_classes
    P = N + 1
    sets = dataset.class_index_sets()
    Ga_per = [np.column_stack([G[:, idx].T, np.ones(idx.size)]) for idx in sets]

    state = MMState.fresh([idx.size for idx in sets], hp.epsilon)
    U = _constraint_columns(mode, K, P)
    Z = None  # cached null-space basis for the fallback solve path

    hinge_trace: list = []
    prev = None
    converged = False
    iterations = hp.max_iters
    A = np.zeros((K, N))
    b = np.zeros(K)
    resid = 0.0
    for t in range(1, hp.max_iters + 1):
        system = assemble_kernel(dataset, gm, mode, hp, state)
        w, _, resid, Z = _solve_reduced(
            system.H, system.rhs, U, system.note, Z
        )
        stacked = w.reshape(K, P)
        A, b = stacked[:, :N], stacked[:, N]
        projections = [Ga_per[k] @ stacked[k] for k in range(K)]

        F = _kernel_regularizer(G, A, b, mode, hp, half=False)
        for k, u in enumerate(projections):
            F += hp.beta * float(np.sum(majorizer(u, state.z[k])))
        state.objective_trace.append(F)
        hinge_trace.append(training_objective_kernel(dataset, gm, A, b, mode, hp))
        if prev is not None and abs(F - prev) <= hp.tol * max(1.0, abs(prev)):
            converged = True
            iterations = t
            break
        prev = F
        state.update(projections)
    if not converged:
        warnings.warn(
            f"MM loop stopped at max_iters={hp.max_iters} before reaching tol",
            MaxItersExceeded,
            stacklevel=2,
        )

    return TrainedKernelModel(
        A=A.copy(),
        b=b.copy(),
        kernel=kernel,
        train_features=dataset.features.copy(),
        mode=mode,
        hyperparameters=hp,
        iterations_used=iterations,
        final_objective=_kernel_regularizer(G, A, b, mode, hp, half=True)
        + hp.beta * _kernel_hinge_sum(dataset, G, A, b),
        kkt_residual=resid,
        ridge=float(ridge),
        converged=converged,
        surrogate_trace=list(state.objective_trace),
        hinge_trace=hinge_trace,
    )


def support_vectors(model, dataset: Dataset, tol_sv: float = 1e-4):
    """Per-class support vector index sets.

    A positive pattern of class k is a support vector when its class-k
    score is at most 1 + tol_sv (on the margin or violating it).  Works
    for both model kinds.
    """
    scores = model.decision_scores(dataset.features)
    out = []
    for k, idx in enumerate(dataset.class_index_sets()):
        on_margin = idx[scores[idx, k] <= 1.0 + tol_sv]
        out.append(on_margin)
    return out
