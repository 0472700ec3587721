"""Momentum-space kernels of the delta-impurity NLS model.

S(p) is the bulk two-body phase, T(p) and R(p) the transmission and
reflection amplitudes of the impurity, and B_alpha(p) the twist relating
the diagonal profiles beta_alpha(p) and beta_alpha(-p).
All functions broadcast over numpy arrays of real momenta.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

PLUS, MINUS = 1, -1
LABELS = (PLUS, MINUS)


@dataclass(frozen=True)
class ModelParams:
    """Coupling g and impurity strength eta."""
    g: float
    eta: float

    def __post_init__(self):
        # g = 0 is accepted: it is the free line used by the g -> 0 checks
        if not (np.isfinite(self.g) and self.g >= 0):
            raise ValueError(f"coupling g must be finite and >= 0, got {self.g}")
        if not (np.isfinite(self.eta) and self.eta >= 0):
            raise ValueError(f"impurity strength eta must be finite and >= 0, got {self.eta}")


def check_label(alpha) -> int:
    if alpha not in LABELS:
        raise ValueError(f"half-line label must be +1 or -1, got {alpha!r}")
    return int(alpha)


def bulk_S(p, params: ModelParams):
    p = np.asarray(p, dtype=float)
    g = params.g
    if g == 0:
        return np.ones_like(p, dtype=complex)
    return (p - 1j * g) / (p + 1j * g)


def defect_TR(p, params: ModelParams):
    """Return (T(p), R(p)). The eta = 0, p = 0 corner is (1, 0)."""
    p = np.asarray(p, dtype=float)
    eta = params.eta
    if eta == 0:
        return np.ones_like(p, dtype=complex), np.zeros_like(p, dtype=complex)
    den = p + 1j * eta
    return p / den, -1j * eta / den


def defect_T(p, params: ModelParams):
    return defect_TR(p, params)[0]


def defect_R(p, params: ModelParams):
    return defect_TR(p, params)[1]


def b_alpha(p, alpha, params: ModelParams):
    alpha = check_label(alpha)
    p = np.asarray(p, dtype=float)
    if alpha == MINUS:
        return -np.ones_like(p, dtype=complex)
    eta = params.eta
    if eta == 0:
        return np.ones_like(p, dtype=complex)
    return (p - 1j * eta) / (p + 1j * eta)


# --- tensor form of the bulk exchange matrix --------------------------------

def bulk_S_matrix(p1, p2, params: ModelParams) -> np.ndarray:
    """Diagonal 4x4 matrices with entries S(a1 p1 - a2 p2), basis (++, +-, -+, --).

    Broadcasts over p1, p2; the matrix axes are the last two.
    """
    p1, p2 = np.broadcast_arrays(np.asarray(p1, float), np.asarray(p2, float))
    d = np.stack([bulk_S(a1 * p1 - a2 * p2, params) for a1, a2 in product(LABELS, LABELS)], -1)
    return d[..., :, None] * np.eye(4)


def _site_perm(i, j, n=3):
    """Permutation matrix taking sites (i, j, rest) to natural order."""
    order = [i, j] + [k for k in range(n) if k not in (i, j)]
    dim = 2 ** n
    P = np.zeros((dim, dim))
    for idx in product(range(2), repeat=n):
        src = sum(idx[order[k]] << (n - 1 - k) for k in range(n))
        dst = sum(idx[k] << (n - 1 - k) for k in range(n))
        P[dst, src] = 1.0
    return P


def embed_pair(mat4, i, j, n=3):
    """Embed a (batched) two-site operator acting on sites (i, j) of n qubit-like sites."""
    P = _site_perm(i, j, n)
    big = np.einsum("...ab,cd->...acbd", mat4, np.eye(2 ** (n - 2)))
    big = big.reshape(mat4.shape[:-2] + (2 ** n, 2 ** n))
    return P @ big @ P.T


_FLIP = np.eye(4)[[0, 2, 1, 3]]


def unitarity_residual(p1, p2, params: ModelParams):
    s12 = bulk_S_matrix(p1, p2, params)
    # S_21(p2, p1) = P S(p2, p1) P with P the flip of the two factors
    s21 = _FLIP @ bulk_S_matrix(p2, p1, params) @ _FLIP
    return np.abs(s12 @ s21 - np.eye(4)).max(axis=(-1, -2))


def ybe_residual(p1, p2, p3, params: ModelParams):
    s12 = embed_pair(bulk_S_matrix(p1, p2, params), 0, 1)
    s13 = embed_pair(bulk_S_matrix(p1, p3, params), 0, 2)
    s23 = embed_pair(bulk_S_matrix(p2, p3, params), 1, 2)
    return np.abs(s12 @ s13 @ s23 - s23 @ s13 @ s12).max(axis=(-1, -2))


@dataclass
class KernelReport:
    s_unitarity: float = 0.0
    matrix_unitarity: float = 0.0
    ybe: float = 0.0
    defect_unitarity: float = 0.0
    defect_cross: float = 0.0
    b_minus: float = 0.0
    b_involution: float = 0.0
    n_samples: int = 0
    extra: dict = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(self.s_unitarity, self.matrix_unitarity, self.ybe,
                   self.defect_unitarity, self.defect_cross, self.b_minus, self.b_involution)

    def as_rows(self):
        return [(k, getattr(self, k)) for k in (
            "s_unitarity", "matrix_unitarity", "ybe", "defect_unitarity",
            "defect_cross", "b_minus", "b_involution")]


def verify_kernel_identities(params: ModelParams, sample_momenta) -> KernelReport:
    p = np.asarray(sample_momenta, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("need at least one sample momentum")
    rep = KernelReport(n_samples=int(p.size))
    rep.s_unitarity = float(np.abs(bulk_S(p, params) * bulk_S(-p, params) - 1).max())
    T, R = defect_TR(p, params)
    Tm, Rm = defect_TR(-p, params)
    rep.defect_unitarity = float(np.abs(T * Tm + R * Rm - 1).max())
    rep.defect_cross = float(np.abs(T * Rm + R * Tm).max())
    rep.b_minus = float(np.abs(b_alpha(p, MINUS, params) + 1).max())
    if params.eta > 0 or np.all(p != 0):
        rep.b_involution = float(max(
            np.abs(b_alpha(p, a, params) * b_alpha(-p, a, params) - 1).max() for a in LABELS))
    # matrix identities on cyclically shifted triples of the sample
    p2, p3 = np.roll(p, 1), np.roll(p, 2)
    rep.matrix_unitarity = float(unitarity_residual(p, p2, params).max())
    rep.ybe = float(ybe_residual(p, p2, p3, params).max())
    return rep
