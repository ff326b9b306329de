"""Supervised contrastive loss reference with analytic gradients.

For a batch of vectors z_1..z_N with labels Y_1..Y_N and temperature t,
with A_i = {j != i : Y_j = Y_i}:

    L_i = -(1/|A_i|) * sum_{j in A_i} log( exp(z_i.z_j/t)
                                           / sum_{k != i} exp(z_i.z_k/t) )
    L   = (1/N) * sum_i L_i,   rows with empty A_i contribute 0.

Row-wise max subtraction stabilizes the log-sum-exp, so logits of 1e4 and
beyond stay finite. The gradient is exact: with s_ik the softmax over
k != i and m ranging over k != i,

    dL/dz is assembled from  w_im = s_im - [m in A_i]/|A_i|  as
    grad = (W Z + W^T Z) / (N t),   rows with empty A_i zeroed in W.

This module is the ground truth the trainer is validated against; it never
trains anything itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateBatch(Exception):
    pass


class NonFiniteInput(Exception):
    pass


@dataclass(frozen=True)
class SclConfig:
    temperature: float = 0.1

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class EmbeddingBatch:
    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.float64)
        labels = np.asarray(self.labels)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        if vectors.ndim != 2 or vectors.shape[0] < 2 or vectors.shape[1] < 1:
            raise DegenerateBatch(f"need an (N>=2, d>=1) matrix, got {vectors.shape}")
        if labels.shape != (vectors.shape[0],):
            raise DegenerateBatch(
                f"labels shape {labels.shape} does not match N={vectors.shape[0]}"
            )
        if not np.isfinite(vectors).all():
            raise NonFiniteInput("embedding batch contains non-finite values")


def _positives_mask(labels: np.ndarray) -> np.ndarray:
    mask = labels[:, None] == labels[None, :]
    np.fill_diagonal(mask, False)
    return mask


def _stable_parts(batch: EmbeddingBatch, cfg: SclConfig):
    z = batch.vectors
    logits = (z @ z.T) / cfg.temperature
    np.fill_diagonal(logits, -np.inf)
    row_max = logits.max(axis=1)
    shifted = logits - row_max[:, None]
    exp = np.exp(shifted)  # diagonal exp(-inf) = 0
    lse = row_max + np.log(exp.sum(axis=1))
    return logits, exp, lse


def scl_loss(batch: EmbeddingBatch, cfg: SclConfig = SclConfig()) -> float:
    mask = _positives_mask(batch.labels)
    counts = mask.sum(axis=1)
    logits, _, lse = _stable_parts(batch, cfg)
    n = batch.vectors.shape[0]
    total = 0.0
    for i in np.flatnonzero(counts):
        log_softmax = logits[i, mask[i]] - lse[i]
        total += -log_softmax.sum() / counts[i]
    return total / n


def scl_gradient(batch: EmbeddingBatch, cfg: SclConfig = SclConfig()) -> np.ndarray:
    mask = _positives_mask(batch.labels)
    counts = mask.sum(axis=1)
    _, exp, _ = _stable_parts(batch, cfg)
    softmax = exp / exp.sum(axis=1, keepdims=True)

    weights = softmax - mask / np.maximum(counts, 1)[:, None]
    weights[counts == 0] = 0.0  # rows with no positives are constant in the loss
    np.fill_diagonal(weights, 0.0)

    n = batch.vectors.shape[0]
    z = batch.vectors
    return (weights @ z + weights.T @ z) / (n * cfg.temperature)


def finite_difference_gradient(
    batch: EmbeddingBatch, cfg: SclConfig = SclConfig(), step: float = 1e-5
) -> np.ndarray:
    """Central finite differences of scl_loss; the independent check."""
    base = batch.vectors
    grad = np.zeros_like(base)
    for i in range(base.shape[0]):
        for j in range(base.shape[1]):
            plus = base.copy()
            plus[i, j] += step
            minus = base.copy()
            minus[i, j] -= step
            grad[i, j] = (
                scl_loss(EmbeddingBatch(plus, batch.labels), cfg)
                - scl_loss(EmbeddingBatch(minus, batch.labels), cfg)
            ) / (2 * step)
    return grad


def relative_gradient_error(
    analytic: np.ndarray, numeric: np.ndarray, zero_tolerance: float = 1e-8
) -> float:
    """Frobenius-norm relative disagreement between two gradients.

    Central differences with step 1e-5 bottom out around 1e-11 absolute, so
    when both gradients sit below `zero_tolerance` (e.g. a saturated batch
    whose loss is constant to machine precision) they are declared equal
    rather than divided into noise.
    """
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if scale <= zero_tolerance:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def random_batch(rng: np.random.Generator, n: int, d: int, n_labels: int = 3) -> EmbeddingBatch:
    return EmbeddingBatch(
        vectors=rng.standard_normal((n, d)),
        labels=rng.integers(0, n_labels, size=n),
    )


def run_self_check(seed: int = 0, n_batches: int = 50, verbose: bool = True) -> bool:
    """Gradient/finite-difference agreement plus basic invariants.

    Used by the `corn scl-check` subcommand; returns True when every check
    passes at the documented tolerances.
    """
    rng = np.random.default_rng(seed)
    temperatures = (0.05, 0.1, 1.0)
    ok = True

    worst = 0.0
    for b in range(n_batches):
        cfg = SclConfig(temperature=temperatures[b % len(temperatures)])
        batch = random_batch(rng, n=int(rng.integers(2, 17)), d=int(rng.integers(2, 9)))
        err = relative_gradient_error(
            scl_gradient(batch, cfg), finite_difference_gradient(batch, cfg)
        )
        worst = max(worst, err)
    grad_ok = worst <= 1e-4
    ok &= grad_ok
    if verbose:
        print(f"[{'PASS' if grad_ok else 'FAIL'}] gradient vs central differences: "
              f"worst relative error {worst:.3e} (tolerance 1e-4, {n_batches} batches)")

    batch = random_batch(rng, n=8, d=4)
    cfg = SclConfig()
    perm = rng.permutation(8)
    permuted = EmbeddingBatch(batch.vectors[perm], batch.labels[perm])
    perm_ok = abs(scl_loss(batch, cfg) - scl_loss(permuted, cfg)) <= 1e-12
    ok &= perm_ok
    if verbose:
        print(f"[{'PASS' if perm_ok else 'FAIL'}] loss invariant under batch permutation")

    unit = batch.vectors / np.linalg.norm(batch.vectors, axis=1, keepdims=True)
    nonneg_ok = scl_loss(EmbeddingBatch(unit, batch.labels), cfg) >= 0.0
    ok &= nonneg_ok
    if verbose:
        print(f"[{'PASS' if nonneg_ok else 'FAIL'}] loss non-negative on normalized vectors")

    big = EmbeddingBatch(unit * 100.0, batch.labels)  # logits up to 1e4/temperature
    value = scl_loss(big, SclConfig(temperature=1.0))
    stable_ok = np.isfinite(value)
    ok &= stable_ok
    if verbose:
        print(f"[{'PASS' if stable_ok else 'FAIL'}] log-sum-exp stable at logit scale 1e4 "
              f"(loss {value:.6g})")
    return bool(ok)
