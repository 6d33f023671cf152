"""Weighted regularized matrix factorization for implicit feedback.

Observed entries get confidence ``1 + conf_alpha`` and preference 1, every
other entry confidence 1 and preference 0. Alternating least squares solves
each user row, then each resource row, exactly; the weighted squared error
plus L2 penalty therefore never increases from one sweep to the next.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .neighbors import InteractionMatrix
from .ranking import ScoredList, top_n_array

_log = logging.getLogger(__name__)

DEFAULT_FACTORS = 500
DEFAULT_ITERATIONS = 100
DEFAULT_REG = 0.001
DEFAULT_CONF_ALPHA = 1.0


@dataclass
class FactorModel:
    user_factors: np.ndarray
    resource_factors: np.ndarray
    reg: float
    conf_alpha: float
    user_ids: tuple[str, ...] = ()
    resource_ids: tuple[str, ...] = ()
    objective_trace: list[float] = field(default_factory=list)

    @property
    def n_factors(self) -> int:
        return self.user_factors.shape[1]


def _solve_rows(mat, other, reg, conf_alpha):
    """Exact minimizer of every row's weighted least-squares subproblem given ``other``."""
    nf = other.shape[1]
    gram = other.T @ other + reg * np.eye(nf)
    out = np.empty((mat.shape[0], nf))
    for i in range(mat.shape[0]):
        idx = mat.indices[mat.indptr[i]:mat.indptr[i + 1]]
        if idx.size == 0:
            out[i] = 0.0
            continue
        y = other[idx]
        a = gram + conf_alpha * (y.T @ y)
        b = (1.0 + conf_alpha) * y.sum(axis=0)
        out[i] = linalg.solve(a, b, assume_a="pos")
    return out


def objective(mat, user_factors, resource_factors, reg, conf_alpha) -> float:
    """Weighted squared error over all entries plus the L2 penalty."""
    mat = mat.tocoo()
    s_obs = np.einsum("ij,ij->i", user_factors[mat.row], resource_factors[mat.col])
    # sum of all squared predictions via the factor Gram matrices
    all_sq = np.sum((user_factors.T @ user_factors) * (resource_factors.T @ resource_factors))
    loss = all_sq + np.sum((1.0 + conf_alpha) * (1.0 - s_obs) ** 2 - s_obs ** 2)
    penalty = reg * (np.sum(user_factors ** 2) + np.sum(resource_factors ** 2))
    return float(loss + penalty)


def gradients(mat, user_factors, resource_factors, reg, conf_alpha):
    """Analytic gradient of :func:`objective` with respect to both factor matrices."""
    mat = mat.tocsr()
    pred = user_factors @ resource_factors.T
    conf = np.ones_like(pred)
    pref = np.zeros_like(pred)
    dense = mat.toarray() > 0
    conf[dense] += conf_alpha
    pref[dense] = 1.0
    resid = conf * (pred - pref)
    gu = 2.0 * (resid @ resource_factors + reg * user_factors)
    gr = 2.0 * (resid.T @ user_factors + reg * resource_factors)
    return gu, gr


def train_wrmf(m: InteractionMatrix, n_factors: int = DEFAULT_FACTORS,
               iterations: int = DEFAULT_ITERATIONS, reg: float = DEFAULT_REG,
               conf_alpha: float = DEFAULT_CONF_ALPHA, seed: int = 0,
               track_objective: bool = False) -> FactorModel:
    """Factorize the interaction matrix by alternating least squares.

    With ``track_objective`` the objective after each sweep is recorded in
    ``objective_trace``.
    """
    if reg <= 0:
        raise ValueError("reg must be > 0")
    if n_factors < 1:
        raise ValueError("n_factors must be >= 1")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mat = m.matrix if isinstance(m, InteractionMatrix) else m
    mat = mat.tocsr()
    n_users, n_res = mat.shape
    if mat.nnz == 0:
        raise ValueError("empty interaction matrix")

    rng = np.random.default_rng(seed)
    scale = 0.01 / np.sqrt(n_factors)
    users = rng.uniform(0.0, scale, size=(n_users, n_factors))
    items = rng.uniform(0.0, scale, size=(n_res, n_factors))
    cols = mat.T.tocsr()

    trace = []
    for it in range(iterations):
        users = _solve_rows(mat, items, reg, conf_alpha)
        items = _solve_rows(cols, users, reg, conf_alpha)
        if track_objective:
            trace.append(objective(mat, users, items, reg, conf_alpha))
        if (it + 1) % 10 == 0:
            _log.debug("WRMF sweep %d/%d", it + 1, iterations)

    ids = (m.user_ids, m.resource_ids) if isinstance(m, InteractionMatrix) else ((), ())
    return FactorModel(users, items, reg, conf_alpha, *ids, objective_trace=trace)


def wrmf_scores(model: FactorModel, m: InteractionMatrix, user, n: int | None = None) -> ScoredList:
    """Dot-product scores over the resources ``user`` has not bookmarked."""
    try:
        u = m.user_index[user]
    except KeyError:
        raise KeyError(f"unknown user {user!r}") from None
    scores = model.resource_factors @ model.user_factors[u]
    mask = np.ones(len(scores), dtype=bool)
    mask[m.owned_indices(user)] = False
    return top_n_array(m.resource_ids, scores, n, mask)


def write_factors(model: FactorModel, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for kind, ids, fac in (("user", model.user_ids, model.user_factors),
                               ("resource", model.resource_ids, model.resource_factors)):
            for rid, row in zip(ids, fac):
                f.write(f"{kind}\t{rid}\t" + "\t".join(format(v, ".17g") for v in row) + "\n")


def write_trace(trace, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("sweep,objective\n")
        for i, v in enumerate(trace, start=1):
            f.write(f"{i},{v!r}\n")
