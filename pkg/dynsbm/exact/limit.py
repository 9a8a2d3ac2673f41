"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Limiting contrast of the normalized log-likelihood:

    M(pi, A) = sum_{q,l} alpha*_q alpha*_l sum_{q',l'} a_qq' a_ll'
               [pi*_ql log pi_q'l' + (1 - pi*_ql) log(1 - pi_q'l')]

and its supremum M(pi) over row-stochastic A. It does not involve Gamma
except through the true stationary law alpha*.
"""

from itertools import combinations, product
import logging

import numpy as np

from ..generic.exceptions import ShapeMismatchException, UnsupportedSizeException
from ..generic.parameters import MAX_SUP_CLASSES, STOCHASTIC_TOL, SUP_IMPROVEMENT, SUP_STARTS

logger = logging.getLogger(__name__)


def _contrast_tensor(pi_true: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """B[q, l, q', l'] = pi*_ql log pi_q'l' + (1 - pi*_ql) log(1 - pi_q'l')"""
    return (
        pi_true[:, :, None, None] * np.log(pi)[None, None]
        + (1.0 - pi_true)[:, :, None, None] * np.log1p(-pi)[None, None]
    )


def _check_inputs(pi_true, alpha_true, pi):
    pi_true = np.asarray(pi_true, dtype=np.float64)
    alpha_true = np.asarray(alpha_true, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    q = len(alpha_true)
    if pi_true.shape != (q, q) or pi.shape != (q, q):
        raise ShapeMismatchException(f'connectivity matrices must be {q} x {q}')
    return pi_true, alpha_true, pi


def _evaluate(weights: np.ndarray, b: np.ndarray, a: np.ndarray) -> float:
    return float(np.einsum('ql,qa,lb,qlab->', weights, a, a, b))


def limit_M(pi_true, alpha_true, pi, a) -> float:
    """
    M(pi, A) for a row-stochastic A.

    Args:
        - *pi_true*: Q x Q true connectivity
        - *alpha_true*: true stationary law
        - *pi*: Q x Q connectivity at which the contrast is evaluated
        - *a*: Q x Q row-stochastic matrix
    """
    pi_true, alpha_true, pi = _check_inputs(pi_true, alpha_true, pi)
    a = np.asarray(a, dtype=np.float64)
    if a.shape != pi.shape:
        raise ShapeMismatchException(f'A must be {pi.shape}, got {a.shape}')
    if np.any(a < 0) or np.max(np.abs(a.sum(axis=1) - 1.0)) > 1e3 * STOCHASTIC_TOL:
        raise ShapeMismatchException('A must be row-stochastic')
    weights = np.outer(alpha_true, alpha_true)
    return _evaluate(weights, _contrast_tensor(pi_true, pi), a)


def _deterministic_values(weights, b, maps):
    """M at every 0/1-row matrix, one row of `maps` per matrix"""
    q = weights.shape[0]
    values = np.zeros(len(maps))
    for i in range(q):
        for j in range(q):
            values += weights[i, j] * b[i, j][maps[:, i], maps[:, j]]
    return values


def _row_candidates(q: int):
    """Vertices and edges of the simplex as (u, v) index pairs; u == v is a vertex"""
    return [(u, u) for u in range(q)] + list(combinations(range(q), 2))


def _best_row(weights, b, a, row) -> tuple[np.ndarray, float]:
    """
    Maximise M over row `row` of A. The objective restricted to one row is a
    quadratic (the q = l term is quadratic in the row), so the search covers
    every vertex and the exact maximum of the quadratic along every edge.
    """
    q = a.shape[0]

    def value_at(r):
        trial = a.copy()
        trial[row] = r
        return _evaluate(weights, b, trial)

    eye = np.eye(q)
    best_r, best_v = a[row].copy(), value_at(a[row])
    for u, v in _row_candidates(q):
        if u == v:
            cand = eye[u]
            val = value_at(cand)
        else:
            f0, f1 = value_at(eye[u]), value_at(eye[v])
            fh = value_at(0.5 * (eye[u] + eye[v]))
            curv = 2.0 * (f0 + f1 - 2.0 * fh)
            slope = f1 - f0 - curv
            if curv >= 0:
                continue
            s = float(np.clip(-slope / (2.0 * curv), 0.0, 1.0))
            cand = (1.0 - s) * eye[u] + s * eye[v]
            val = value_at(cand)
        if val > best_v + SUP_IMPROVEMENT:
            best_r, best_v = cand, val
    return best_r, best_v


def limit_M_sup(pi_true, alpha_true, pi) -> tuple[float, np.ndarray]:
    """
    sup over row-stochastic A of M(pi, A).

    All Q^Q deterministic matrices are scored, then the best few are improved
    by alternating exact row maximisation until no row gains more than
    SUP_IMPROVEMENT.

    Returns:
        (value, A) with A the maximiser found
    """
    pi_true, alpha_true, pi = _check_inputs(pi_true, alpha_true, pi)
    q = len(alpha_true)
    if q > MAX_SUP_CLASSES:
        raise UnsupportedSizeException(f'limit_M_sup supports Q <= {MAX_SUP_CLASSES}')
    weights = np.outer(alpha_true, alpha_true)
    b = _contrast_tensor(pi_true, pi)
    if q == 1:
        a = np.ones((1, 1))
        return _evaluate(weights, b, a), a

    maps = np.array(list(product(range(q), repeat=q)), dtype=np.int64)
    values = _deterministic_values(weights, b, maps)
    order = np.argsort(-values, kind='stable')[:SUP_STARTS]

    eye = np.eye(q)
    best_value, best_a = -np.inf, None
    for k in order:
        a = eye[maps[k]].copy()
        value = float(values[k])
        improved = True
        while improved:
            improved = False
            for row in range(q):
                r, v = _best_row(weights, b, a, row)
                if v > value + SUP_IMPROVEMENT:
                    a[row] = r
                    value = v
                    improved = True
        if value > best_value:
            best_value, best_a = value, a
    logger.debug('limit_M_sup = %.12g', best_value)
    return best_value, best_a


def limit_M_T(pi_true, alpha_true, pi) -> float:
    """
    Finite-T contrast: the average over time steps of M(pi^t) computed with
    the true connectivity pi*^t of the same step.
    """
    pi_true = np.asarray(pi_true, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    if pi_true.ndim != 3 or pi_true.shape != pi.shape:
        raise ShapeMismatchException('pi_true and pi must be T x Q x Q stacks of equal shape')
    values = [limit_M_sup(p_star, alpha_true, p)[0] for p_star, p in zip(pi_true, pi)]
    return float(np.mean(values))
