"""Factor geometry: the product manifold of unit-norm rows (d = 1) or of
d x r blocks with orthonormal rows (d > 1), and the projection, tangent and
geodesic operations on it.

Factor matrices are plain (n, r) float arrays, read as q stacked d-row
blocks.  Not every factor lies on the manifold; only the projected iterate
does.  All operations here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjection, OffManifold, UnsupportedManifold

RANK_EPS = 1e-12  # relative singular-value cutoff for degenerate blocks


@dataclass(frozen=True)
class ManifoldSpec:
    """Block structure of the constraint set.

    q blocks of d rows each (n = q * d) with r columns; d = 1 is the sphere
    case where every row has unit norm, d > 1 requires each d x r block B to
    satisfy B @ B.T = I_d.
    """

    q: int
    d: int
    r: int

    def __post_init__(self):
        if self.q < 1 or self.d < 1:
            raise ValueError(f"need q >= 1 and d >= 1, got q={self.q}, d={self.d}")
        if self.r < self.d:
            raise ValueError(f"rank r={self.r} must be >= block size d={self.d}")

    @property
    def n(self):
        return self.q * self.d

    @staticmethod
    def default_rank(n, d=1):
        """ceil(sqrt(2 n)), floored at d + 1 for block problems."""
        r = math.ceil(math.sqrt(2 * n))
        return max(r, d + 1) if d > 1 else r

    @classmethod
    def sphere(cls, n, r=None):
        return cls(q=n, d=1, r=r if r is not None else cls.default_rank(n))

    @classmethod
    def stiefel(cls, q, d, r=None):
        return cls(q=q, d=d, r=r if r is not None else cls.default_rank(q * d, d))


def manifold_violation(spec, X):
    """Max deviation from the manifold: |row norm - 1| for d = 1, entrywise
    max of |B B^T - I| over blocks otherwise."""
    X = np.asarray(X)
    if spec.d == 1:
        return float(np.abs(np.linalg.norm(X, axis=1) - 1.0).max())
    B = X.reshape(spec.q, spec.d, spec.r)
    gram = B @ B.transpose(0, 2, 1)
    return float(np.abs(gram - np.eye(spec.d)).max())


def _require_on_manifold(spec, X, tol, what):
    err = manifold_violation(spec, X)
    if err > tol:
        raise OffManifold(f"{what} is off the manifold by {err:.3e} (tol {tol:.1e})")


def normalize_rows(G):
    """Scale each row to unit Euclidean norm.

    Raises
    ------
    DegenerateProjection
        If some row has zero norm; the message names the first such row.
    """
    G = np.asarray(G, dtype=np.float64)
    norms = np.linalg.norm(G, axis=1)
    bad = np.flatnonzero(norms <= 0.0)
    if bad.size:
        raise DegenerateProjection(
            f"cannot normalize zero row {bad[0]}", block=int(bad[0])
        )
    return G / norms[:, None]


def project_block(G):
    """Nearest matrix with orthonormal rows to a d x r block (d <= r).

    Computes the orthogonal polar factor through the eigendecomposition of
    the d x d Gram matrix G G^T; the result B satisfies B @ B.T = I_d to
    1e-12 and minimizes the Frobenius distance to G.

    Raises
    ------
    DegenerateProjection
        If the smallest singular value of G is <= 1e-12 times the largest.
    """
    G = np.asarray(G, dtype=np.float64)
    return _polar_rows_batched(G[None])[0]


def _polar_rows_batched(G):
    """Polar factors of a (q, d, r) stack with one corrective pass when
    ill conditioning degrades orthonormality."""
    B = _gram_polar(G)
    d = G.shape[1]
    err = np.abs(B @ B.transpose(0, 2, 1) - np.eye(d)).max()
    if err > 1e-13:
        B = _gram_polar(B)
    return B


def _gram_polar(G):
    w, Q = np.linalg.eigh(G @ G.transpose(0, 2, 1))
    w = np.maximum(w, 0.0)
    smax = np.sqrt(w[:, -1])
    smin = np.sqrt(w[:, 0])
    bad = np.flatnonzero((smax == 0.0) | (smin <= RANK_EPS * smax))
    if bad.size:
        raise DegenerateProjection(
            "degenerate projection input", block=int(bad[0])
        )
    inv_root = (Q / np.sqrt(w)[:, None, :]) @ Q.transpose(0, 2, 1)
    return inv_root @ G


def project(spec, G):
    """Project a full factor onto the manifold block by block."""
    G = np.asarray(G, dtype=np.float64)
    if spec.d == 1:
        return normalize_rows(G)
    stacked = G.reshape(spec.q, spec.d, spec.r)
    return _polar_rows_batched(stacked).reshape(spec.n, spec.r)


def tangent_project(spec, sigma, G):
    """Orthogonal projection of G onto the tangent space at sigma.

    Sphere rows: u_i = G_i - <sigma_i, G_i> sigma_i.  Blocks: with the d x r
    slices B_i of sigma, u_i = G_i - sym(G_i B_i^T) B_i.  Idempotent; the
    result satisfies the tangency conditions to 1e-12.
    """
    G = np.asarray(G, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    _require_on_manifold(spec, sigma, 1e-8, "tangent_project base point")
    if spec.d == 1:
        coeff = np.sum(sigma * G, axis=1, keepdims=True)
        return G - coeff * sigma
    B = sigma.reshape(spec.q, spec.d, spec.r)
    Gb = G.reshape(spec.q, spec.d, spec.r)
    A = Gb @ B.transpose(0, 2, 1)
    out = Gb - 0.5 * (A + A.transpose(0, 2, 1)) @ B
    return out.reshape(spec.n, spec.r)


def geodesic_step(spec, sigma, u, t):
    """Move along the great circles of the sphere product.

    Each row becomes sigma_i cos(||u_i|| t) + (u_i / ||u_i||) sin(||u_i|| t);
    rows with u_i = 0 are returned unchanged (the limit of the formula).
    Requires d = 1 and a tangent u; the result has unit rows to 1e-12.
    """
    if spec.d != 1:
        raise UnsupportedManifold("geodesic_step is defined for d = 1 only")
    sigma = np.asarray(sigma, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    norms = np.linalg.norm(u, axis=1, keepdims=True)
    moving = norms[:, 0] > 0.0
    angles = norms * t
    out = sigma.copy()
    if np.any(moving):
        direction = np.zeros_like(u)
        direction[moving] = u[moving] / norms[moving]
        out[moving] = (
            sigma[moving] * np.cos(angles[moving])
            + direction[moving] * np.sin(angles[moving])
        )
    return out


def random_point(spec, seed):
    """Seeded random factor on the manifold: entries i.i.d. uniform [0, 1),
    then projected block by block.  Deterministic for a fixed seed; on the
    (measure-zero) chance of a degenerate block, resamples with an
    incremented seed, at most 8 attempts."""
    for attempt in range(8):
        rng = np.random.default_rng(seed + attempt)
        G = rng.random((spec.n, spec.r))
        try:
            return project(spec, G)
        except DegenerateProjection:
            continue
    raise DegenerateProjection(
        f"random_point: 8 consecutive degenerate samples from seed {seed}"
    )
