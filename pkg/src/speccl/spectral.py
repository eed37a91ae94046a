"""Clustered spectral decomposition of real symmetric matrices.

The excitation collector steers each eigenvalue of a growing Gram-type
matrix individually.  That requires the decomposition in *distinct
eigenvalue* form: eigenvalues merged into clusters, one orthogonal
projector per cluster, and an explicit zero cluster marking the
directions that carry no collected information yet.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NotSymmetricError",
    "PSDViolationError",
    "Spectrum",
    "symmetric_eigensystem",
    "project",
    "smallest_positive_eigenvalue",
    "numeric_rank",
]


class NotSymmetricError(ValueError):
    """Matrix expected to be symmetric deviates beyond tolerance."""


class PSDViolationError(ValueError):
    """Nominally positive semi-definite matrix has a significant negative eigenvalue."""


class Spectrum:
    """Distinct eigenvalues of a symmetric matrix with orthogonal projectors.

    Attributes
    ----------
    distinct_eigenvalues : (h,) ndarray
        Cluster values in ascending order.  The zero cluster, when present,
        holds the exact value 0.0.
    projectors : list of (p, p) ndarray
        Orthogonal projector onto the eigenspace of each cluster.
    multiplicities : (h,) ndarray of int
        Cluster sizes; they sum to the matrix dimension.
    tol_zero : float
        Threshold below which a cluster counts as the zero cluster.
    """

    __slots__ = ("distinct_eigenvalues", "projectors", "multiplicities", "tol_zero")

    def __init__(self, distinct_eigenvalues, projectors, multiplicities, tol_zero):
        self.distinct_eigenvalues = np.asarray(distinct_eigenvalues, dtype=float)
        self.projectors = [np.asarray(E, dtype=float) for E in projectors]
        self.multiplicities = np.asarray(multiplicities, dtype=int)
        self.tol_zero = float(tol_zero)

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    @property
    def zero_index(self):
        """Index of the zero cluster, or None when the matrix has full numeric rank."""
        hits = np.flatnonzero(self.distinct_eigenvalues == 0.0)
        return int(hits[0]) if hits.size else None

    def zero_projector(self):
        """Projector onto the nullspace cluster; the zero matrix when rank is full."""
        i = self.zero_index
        if i is None:
            return np.zeros((self.dim, self.dim))
        return self.projectors[i]

    def expanded_eigenvalues(self):
        """Eigenvalues repeated per multiplicity, ascending (length p)."""
        return np.repeat(self.distinct_eigenvalues, self.multiplicities)

    def reconstruct(self):
        """Sum of eigenvalue-weighted projectors."""
        out = np.zeros((self.dim, self.dim))
        for lam, E in zip(self.distinct_eigenvalues, self.projectors):
            out += lam * E
        return out

    def __repr__(self):
        pairs = ", ".join(
            f"{lam:.6g}(x{m})"
            for lam, m in zip(self.distinct_eigenvalues, self.multiplicities)
        )
        return f"Spectrum[{pairs}]"


def symmetric_eigensystem(
    W, tol_cluster=None, tol_zero=None, require_psd=False, check_symmetry=True
):
    """Eigendecomposition of a symmetric matrix with eigenvalue clustering.

    Eigenvalues within ``tol_cluster`` of their neighbour are merged into one
    cluster whose value is the multiplicity-weighted mean and whose projector
    is the sum of the member projectors.  Cluster values inside
    ``[-tol_zero, tol_zero]`` are clamped to exactly 0 and fused into a single
    zero cluster, so at most one cluster is zero.

    Parameters
    ----------
    W : (p, p) array_like, symmetric to 1e-8 * max(1, max|W|)
    tol_cluster : float, optional
        Merge tolerance; defaults to 1e-8 * max(1, max|eigenvalue|).
    tol_zero : float, optional
        Zero-clamp threshold; defaults to 1e-9 * max(1, max|eigenvalue|).
    require_psd : bool
        When True, any raw eigenvalue below ``-tol_zero`` raises
        :class:`PSDViolationError` (values in ``[-tol_zero, 0)`` are clamped).
    check_symmetry : bool
        Callers that maintain symmetry structurally (the simulation engine
        symmetrizes after every step) may skip the tolerance check.

    Raises
    ------
    NotSymmetricError, PSDViolationError, ValueError
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {W.shape}")
    if check_symmetry:
        scale = max(1.0, float(np.abs(W).max()))
        asym = float(np.abs(W - W.T).max())
        if asym > 1e-8 * scale:
            raise NotSymmetricError(
                f"matrix asymmetry {asym:.3e} exceeds {1e-8 * scale:.3e}"
            )
        W = 0.5 * (W + W.T)

    evals, evecs = np.linalg.eigh(W)
    ev = evals.tolist()
    lam_scale = max(1.0, max(abs(ev[0]), abs(ev[-1])))
    if tol_cluster is None:
        tol_cluster = 1e-8 * lam_scale
    if tol_zero is None:
        tol_zero = 1e-9 * lam_scale
    if tol_cluster <= 0.0 or tol_zero <= 0.0:
        raise ValueError("tol_cluster and tol_zero must be positive")
    if require_psd and ev[0] < -tol_zero:
        raise PSDViolationError(
            f"eigenvalue {ev[0]:.3e} below -{tol_zero:.3e} on a PSD-required matrix"
        )

    # Chain clustering on the ascending eigenvalues.
    boundaries = [0]
    for i in range(1, len(ev)):
        if ev[i] - ev[i - 1] > tol_cluster:
            boundaries.append(i)
    boundaries.append(len(ev))

    values, projectors, mults = [], [], []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        lam = sum(ev[a:b]) / (b - a)
        if abs(lam) <= tol_zero:
            lam = 0.0
        Q = evecs[:, a:b]
        values.append(lam)
        projectors.append(Q @ Q.T)
        mults.append(b - a)

    # Fuse multiple zero-clamped clusters into one.
    zero_hits = [i for i, lam in enumerate(values) if lam == 0.0]
    if len(zero_hits) > 1:
        keep = zero_hits[0]
        for i in reversed(zero_hits[1:]):
            projectors[keep] = projectors[keep] + projectors[i]
            mults[keep] += mults[i]
            del values[i], projectors[i], mults[i]

    return Spectrum(values, projectors, mults, tol_zero)


def project(v, E):
    """Orthogonal projection ``E @ v`` after validating that E is a projector.

    ``E`` must be symmetric idempotent to 1e-8 and match the dimension of ``v``.
    """
    v = np.asarray(v, dtype=float)
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValueError(f"projector must be square, got shape {E.shape}")
    if v.shape != (E.shape[0],):
        raise ValueError(f"dimension mismatch: v {v.shape} vs projector {E.shape}")
    if float(np.abs(E - E.T).max()) > 1e-8:
        raise ValueError("projector is not symmetric to 1e-8")
    if float(np.abs(E @ E - E).max()) > 1e-8:
        raise ValueError("projector is not idempotent to 1e-8")
    return E @ v


def smallest_positive_eigenvalue(spectrum):
    """Smallest cluster value above the zero threshold, or None if none exists."""
    lams = spectrum.distinct_eigenvalues
    positive = lams[lams > spectrum.tol_zero]
    return float(positive.min()) if positive.size else None


def numeric_rank(spectrum):
    """Matrix dimension minus the multiplicity of the zero cluster."""
    i = spectrum.zero_index
    if i is None:
        return int(spectrum.multiplicities.sum())
    return int(spectrum.multiplicities.sum() - spectrum.multiplicities[i])
