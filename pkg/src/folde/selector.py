"""Batch acquisition: top-N, UCB, and the constant-liar greedy batch builder.

Constant-liar picks the UCB-maximizing candidate, then pretends to observe a
pessimistic value for it (the minimum of the initial candidate means) and
conditions the remaining joint Gaussian on that fictitious observation. The
observation carries noise alpha * median(diag(cov)), so small alpha makes the
lie confident (aggressive diversification) while large alpha neutralizes it
and the batch degenerates to plain top-N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEGATIVE_VARIANCE_TOL = 1e-12
SYMMETRY_TOL = 1e-9


class SingularUpdateError(ValueError):
    """Effective observation variance vanished; the conditioning step is undefined."""


def top_n_select(scores, n: int) -> list[int]:
    """Indices of the n largest scores, descending; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    if n > len(scores):
        raise ValueError(f"requested {n} of {len(scores)} scores")
    order = np.argsort(-scores, kind="stable")
    return [int(i) for i in order[:n]]


def ucb_score(mean, cov, beta: float) -> np.ndarray:
    """mean_i + beta * sqrt(cov_ii), with tiny negative variances clamped to zero."""
    mean = np.asarray(mean, dtype=np.float64)
    variances = np.diagonal(np.asarray(cov, dtype=np.float64)).copy()
    if variances.min(initial=0.0) < -NEGATIVE_VARIANCE_TOL:
        raise ValueError(f"negative variance {variances.min()} on the covariance diagonal")
    np.clip(variances, 0.0, None, out=variances)
    return mean + beta * np.sqrt(variances)


@dataclass
class CLState:
    """Evolving candidate beliefs while a batch is built.

    ``remaining`` maps the rows of ``mean``/``cov`` back to the caller's
    original candidate indices. ``lie_value`` is frozen at construction: the
    minimum of the initial candidate means.
    """

    remaining: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    alpha: float
    lie_value: float
    noise_mode: str = "per_step"

    @classmethod
    def create(
        cls,
        mean,
        cov,
        alpha: float,
        noise_mode: str = "per_step",
        validate: bool = True,
    ) -> "CLState":
        mean = np.asarray(mean, dtype=np.float64).copy()
        cov = np.asarray(cov, dtype=np.float64).copy()
        if cov.shape != (len(mean), len(mean)):
            raise ValueError(f"covariance shape {cov.shape} does not match {len(mean)} means")
        if not np.isfinite(alpha) or alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
        if noise_mode not in ("per_step", "upfront"):
            raise ValueError(f"unknown noise_mode {noise_mode!r}")
        if validate:
            scale = max(1.0, float(np.abs(cov).max(initial=0.0)))
            if np.abs(cov - cov.T).max(initial=0.0) > SYMMETRY_TOL * scale:
                raise ValueError("covariance is not symmetric")
            if len(mean) and np.linalg.eigvalsh(cov).min() < -1e-9 * scale:
                raise ValueError("covariance is not positive semidefinite")
        if noise_mode == "upfront" and len(mean):
            cov = cov + alpha * float(np.median(np.diagonal(cov))) * np.eye(len(mean))
        return cls(
            remaining=np.arange(len(mean), dtype=np.int64),
            mean=mean,
            cov=cov,
            alpha=float(alpha),
            lie_value=float(mean.min()) if len(mean) else 0.0,
            noise_mode=noise_mode,
        )

    def ucb(self, beta: float) -> np.ndarray:
        return ucb_score(self.mean, self.cov, beta)


def cl_update(state: CLState, chosen: int) -> CLState:
    """Condition the remaining candidates on a lie observed for ``chosen``.

    ``chosen`` is an original candidate index still present in
    ``state.remaining``. The covariance shrinks by the usual rank-one Schur
    term and is unaffected by the lie's value; the mean shifts toward the lie
    in proportion to each candidate's covariance with the chosen one.
    """
    hits = np.nonzero(state.remaining == chosen)[0]
    if len(hits) == 0:
        raise ValueError(f"candidate {chosen} is not in the remaining set")
    pos = int(hits[0])
    diag = np.diagonal(state.cov)
    sigma2 = float(diag[pos])
    if state.noise_mode == "per_step":
        sigma2 += state.alpha * float(np.median(diag))
    if sigma2 <= NEGATIVE_VARIANCE_TOL:
        raise SingularUpdateError(
            f"effective observation variance {sigma2:.3e} for candidate {chosen}"
        )
    keep = np.arange(len(state.remaining)) != pos
    v = state.cov[keep, pos]
    new_cov = state.cov[np.ix_(keep, keep)] - np.outer(v, v) / sigma2
    new_cov = (new_cov + new_cov.T) / 2.0
    new_mean = state.mean[keep] + v * (state.lie_value - state.mean[pos]) / sigma2
    return CLState(
        remaining=state.remaining[keep],
        mean=new_mean,
        cov=new_cov,
        alpha=state.alpha,
        lie_value=state.lie_value,
        noise_mode=state.noise_mode,
    )


def constant_liar_select(
    mean,
    cov,
    n: int,
    alpha: float,
    beta: float = 1.0,
    noise_mode: str = "per_step",
) -> list[int]:
    """Greedy batch of n candidate indices, diversified by pessimistic lies.

    Each step takes the UCB argmax over the current state, then applies
    ``cl_update`` for the pick. Returns picks in selection order.
    """
    mean = np.asarray(mean, dtype=np.float64)
    if n > len(mean):
        raise ValueError(f"requested batch of {n} from {len(mean)} candidates")
    state = CLState.create(mean, cov, alpha, noise_mode=noise_mode, validate=False)
    batch: list[int] = []
    for _ in range(n):
        scores = state.ucb(beta)
        pick = int(state.remaining[int(np.argmax(scores))])
        batch.append(pick)
        if len(state.remaining) > 1:
            state = cl_update(state, pick)
    return batch
