"""Passage Alignment Memories and Unified Memories."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.errors import ContractError, DimensionError
from model.encoder import Mpm
from numerics import NdArray, ops


@dataclass
class Pam:
    matrix: NdArray  # [W x L]


@dataclass
class Um:
    hidden: NdArray  # [..., N, W + L]
    mask: np.ndarray


def _slot_rows(slot: int, n_rows: int, n_max: int) -> np.ndarray:
    return np.arange(slot * n_max, slot * n_max + n_rows)


def build_pam(i: int, mpms: Mpm, W_p: NdArray, n_max: int) -> Pam:
    """PA^i = stack^T W^p over the passages other than i.

    ``mpms`` holds every passage's MPM [K x N x W]. Non-target passages fill the
    stack slots in passage order, each slot ``n_max`` rows long; unused rows
    and slots are zero, so only the matching W^p rows take part.
    """
    K, N, W = mpms.hidden.shape
    L = W_p.shape[1]
    if N > n_max:
        raise ContractError(f"build_pam: passage length {N} exceeds N_max={n_max}")
    if (K - 1) * n_max > W_p.shape[0]:
        raise ContractError(f"build_pam: {K} passages exceed the {W_p.shape[0]} alignment rows")
    if not 0 <= i < K:
        raise ContractError(f"build_pam: target {i} out of range for K={K}")
    others = [k for k in range(K) if k != i]
    if not others:
        return Pam(NdArray(np.zeros((W, L))))

    hidden = ops.mul(mpms.hidden, mpms.mask[..., None].astype(np.float64))
    stack = ops.reshape(hidden[others], (len(others) * N, W))
    rows = np.concatenate([_slot_rows(s, N, n_max) for s in range(len(others))])
    return Pam(ops.matmul(ops.transpose(stack), W_p[rows]))


def build_um(H: Mpm, pam: Pam) -> Um:
    """u_j = [h_j, h_j PA]."""
    if H.hidden.shape[-1] != pam.matrix.shape[-2]:
        raise DimensionError("build_um", H.hidden.shape, pam.matrix.shape)
    return Um(ops.concat([H.hidden, ops.matmul(H.hidden, pam.matrix)], axis=-1), H.mask)


def build_memories(mpms: Mpm, W_p: Optional[NdArray], n_max: int) -> Um:
    """UMs for every passage [K x N x (W + L)], or the MPMs themselves when no alignment weights exist."""
    if W_p is None:
        return Um(mpms.hidden, mpms.mask)
    K = mpms.hidden.shape[0]
    pams = ops.stack([build_pam(i, mpms, W_p, n_max).matrix for i in range(K)], axis=0)
    return build_um(mpms, Pam(pams))
