"""Simplicial Fourier analysis of edge flows.

The eigenbasis of the Hodge 1-Laplacian splits into gradient, curl and
harmonic eigenvectors.  Whenever a gradient and a curl eigenvalue coincide,
the shared eigenspace is rotated so that every returned eigenvector lies in
exactly one of the three Hodge subspaces.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .complex import HodgeLaplacians, IncidencePair

__all__ = [
    "Label",
    "Spectrum",
    "HodgeEmbedding",
    "EigensolverFailure",
    "AmbiguousEigenvector",
    "eigendecompose",
    "classify",
    "sft",
    "isft",
    "embed",
    "project",
    "fix_signs",
]


class Label(str, enum.Enum):
    GRADIENT = "Gradient"
    CURL = "Curl"
    HARMONIC = "Harmonic"

    @classmethod
    def parse(cls, value: "str | Label") -> "Label":
        if isinstance(value, cls):
            return value
        for member in cls:
            if value.lower() in (member.value.lower(), member.name.lower(), member.value[0].lower()):
                return member
        raise ValueError(f"unknown subspace {value!r}; expected gradient, curl or harmonic")


class EigensolverFailure(RuntimeError):
    pass


class AmbiguousEigenvector(RuntimeError):
    """An eigenvector has both a divergence and a curl component."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of ``L1`` with their Hodge labels.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``; eigenvalues ascend.
    ``q_g``, ``q_c`` and ``q_h`` are index arrays into the eigenpairs.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: tuple[Label, ...]
    tol_zero: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def indices(self, label: Label | str) -> np.ndarray:
        label = Label.parse(label)
        return np.array([i for i, lab in enumerate(self.labels) if lab is label], dtype=np.int64)

    @property
    def q_g(self) -> np.ndarray:
        return self.indices(Label.GRADIENT)

    @property
    def q_c(self) -> np.ndarray:
        return self.indices(Label.CURL)

    @property
    def q_h(self) -> np.ndarray:
        return self.indices(Label.HARMONIC)

    def basis(self, label: Label | str) -> np.ndarray:
        return self.eigenvectors[:, self.indices(label)]

    def counts(self) -> dict[Label, int]:
        return {lab: int(len(self.indices(lab))) for lab in Label}


@dataclass(frozen=True)
class HodgeEmbedding:
    gradient: np.ndarray
    curl: np.ndarray
    harmonic: np.ndarray


def fix_signs(vectors: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Flip columns so the first non-negligible entry of each is positive."""
    v = np.array(vectors, dtype=float, copy=True)
    for k in range(v.shape[1]):
        col = v[:, k]
        big = np.flatnonzero(np.abs(col) > rel_tol * np.abs(col).max(initial=0.0))
        if big.size and col[big[0]] < 0:
            v[:, k] = -col
    return v


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted values whose consecutive gaps are at most ``tol``."""
    if values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    return np.split(np.arange(values.size), breaks)


def classify(
    eigenvalue: float,
    eigenvector: np.ndarray,
    pair: IncidencePair,
    tol_zero: float,
) -> Label:
    """Label one eigenpair of ``L1``.

    Harmonic below ``tol_zero``; otherwise whichever of the divergence
    measure ``||B1 u||^2`` and the curl measure ``||B2^T u||^2`` dominates.
    """
    u = np.asarray(eigenvector, dtype=float)
    if eigenvalue < tol_zero:
        return Label.HARMONIC
    div = float(np.sum((pair.b1 @ u) ** 2))
    curl = float(np.sum((pair.b2.T @ u) ** 2))
    if min(div, curl) > tol_zero * np.linalg.norm(u):
        raise AmbiguousEigenvector(
            f"eigenvalue {eigenvalue:.6g}: divergence {div:.3g} and curl {curl:.3g} both nonzero"
        )
    return Label.GRADIENT if div >= curl else Label.CURL


def eigendecompose(
    lap: HodgeLaplacians,
    tol_zero: float | None = None,
    cluster_rtol: float = 1e-8,
) -> Spectrum:
    """Full eigendecomposition of ``L1`` with gradient/curl/harmonic labels.

    ``tol_zero`` defaults to ``1e-8 * max(eigenvalue)``.  Eigenvalues within
    ``cluster_rtol * max(eigenvalue)`` of each other are treated as one
    eigenspace, which is re-diagonalized against the lower Laplacian so its
    basis separates into gradient and curl vectors.
    """
    l1 = lap.l1.toarray()
    n = l1.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)), (), 0.0 if tol_zero is None else tol_zero)
    try:
        w, u = scipy.linalg.eigh(l1)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc

    scale = max(float(w[-1]), 1.0)
    if tol_zero is None:
        tol_zero = 1e-8 * scale
    lower = lap.l1_lower.toarray()

    u = u.copy()
    for idx in _clusters(w, cluster_rtol * scale):
        if idx.size < 2 or w[idx[0]] < tol_zero:
            continue
        # L1 and its lower part commute, so each L1 eigenspace is invariant
        # under the lower part, whose restriction has eigenvalues 0 (curl) or lambda (gradient).
        basis = u[:, idx]
        _, rot = np.linalg.eigh(basis.T @ lower @ basis)
        u[:, idx] = basis @ rot
    # the harmonic block needs no rotation: it is the joint kernel

    u = fix_signs(u)
    w = np.where(w < tol_zero, np.maximum(w, 0.0), w)
    labels = tuple(classify(w[i], u[:, i], lap.incidence, tol_zero) for i in range(n))
    return Spectrum(eigenvalues=w, eigenvectors=u, labels=labels, tol_zero=tol_zero)


def _check(spectrum: Spectrum, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != spectrum.n:
        raise ValueError(f"signal has {x.shape[0]} entries, spectrum has {spectrum.n}")
    return x


def sft(spectrum: Spectrum, flow: np.ndarray) -> np.ndarray:
    """Simplicial Fourier transform ``U^T f``."""
    return spectrum.eigenvectors.T @ _check(spectrum, flow)


def isft(spectrum: Spectrum, coeffs: np.ndarray) -> np.ndarray:
    return spectrum.eigenvectors @ _check(spectrum, coeffs)


def embed(spectrum: Spectrum, flow: np.ndarray) -> HodgeEmbedding:
    f = _check(spectrum, flow)
    return HodgeEmbedding(
        gradient=spectrum.basis(Label.GRADIENT).T @ f,
        curl=spectrum.basis(Label.CURL).T @ f,
        harmonic=spectrum.basis(Label.HARMONIC).T @ f,
    )


def project(spectrum: Spectrum, flow: np.ndarray, subspace: Label | str) -> np.ndarray:
    """Orthogonal projection of ``flow`` onto one Hodge subspace."""
    f = _check(spectrum, flow)
    basis = spectrum.basis(subspace)
    return basis @ (basis.T @ f)
