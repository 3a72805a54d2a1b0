"""Least-squares filter design from a target frequency response or from data.

All systems are column-equilibrated and solved with an SVD-based least-squares
routine (minimum-norm solution on rank deficiency).  Normal equations are never formed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .complex import HodgeLaplacians
from .filtering import FirFilter, SvFilter
from .spectral import Label, Spectrum

__all__ = [
    "ConflictWarning",
    "SingularDesign",
    "RankDeficientData",
    "DesignSpec",
    "DesignReport",
    "distinct_groups",
    "design_fir",
    "design_sv",
    "fir_data_matrix",
    "sv_data_matrix",
    "fit_fir_from_data",
    "fit_sv_from_data",
]


class ConflictWarning(UserWarning):
    """Coinciding frequencies were given different targets; they were averaged."""


class SingularDesign(UserWarning):
    """The design matrix is numerically rank deficient."""


class RankDeficientData(UserWarning):
    """The stacked data matrix has fewer independent columns than coefficients."""


@dataclass(frozen=True)
class DesignSpec:
    """Desired response ``targets[i]`` at eigenpair ``i`` of a spectrum."""

    targets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=float).ravel())

    @classmethod
    def from_labels(
        cls, spectrum: Spectrum, gradient: float = 0.0, curl: float = 0.0, harmonic: float = 0.0
    ) -> "DesignSpec":
        value = {Label.GRADIENT: gradient, Label.CURL: curl, Label.HARMONIC: harmonic}
        return cls(np.array([value[lab] for lab in spectrum.labels], dtype=float))

    @classmethod
    def preserving(cls, spectrum: Spectrum, component: Label | str) -> "DesignSpec":
        """Target 1 on one Hodge subspace and 0 on the other two."""
        comp = Label.parse(component)
        return cls(np.array([float(lab is comp) for lab in spectrum.labels]))

    @classmethod
    def from_mapping(cls, spectrum: Spectrum, mapping: Mapping) -> "DesignSpec":
        """Build from ``{"gradient": g, "curl": c, "harmonic": h}`` and/or ``{index: value}``.

        Per-index entries override label entries.  Every eigenpair must end up
        with a target.
        """
        targets = np.full(spectrum.n, np.nan)
        for key, val in mapping.items():
            if isinstance(key, str) and not key.lstrip("-").isdigit():
                targets[spectrum.indices(Label.parse(key))] = float(val)
        for key, val in mapping.items():
            if isinstance(key, int) or (isinstance(key, str) and key.lstrip("-").isdigit()):
                i = int(key)
                if not 0 <= i < spectrum.n:
                    raise IndexError(f"eigenvalue index {i} out of range")
                targets[i] = float(val)
        if np.isnan(targets).any():
            missing = np.flatnonzero(np.isnan(targets)).tolist()
            raise ValueError(f"no target for eigenvalue indices {missing}")
        return cls(targets)


@dataclass(frozen=True)
class DesignReport:
    residual: float
    condition: float
    rank: int
    n_rows: int
    n_coeffs: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "residual": float(self.residual),
            "condition": float(self.condition),
            "rank": int(self.rank),
            "n_rows": int(self.n_rows),
            "n_coeffs": int(self.n_coeffs),
            **self.extra,
        }


def distinct_groups(values: np.ndarray, rtol: float = 1e-8) -> list[np.ndarray]:
    """Indices of ``values`` grouped into numerically equal clusters.

    Values closer than ``rtol * max(1, max|values|)`` to a neighbor in sorted
    order share a group.  Groups come out in ascending value order.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    order = np.argsort(values, kind="stable")
    tol = rtol * max(1.0, float(np.abs(values).max()))
    breaks = np.flatnonzero(np.diff(values[order]) > tol) + 1
    return np.split(order, breaks)


def _collapse(values, targets, idx, what: str, rtol: float, weight_by_multiplicity: bool):
    """Rows ``(node, target, weight)`` for the eigenpairs in ``idx``."""
    nodes, goals, weights = [], [], []
    for grp in distinct_groups(values[idx], rtol):
        members = idx[grp]
        g = targets[members]
        if np.ptp(g) > 0:
            where = f"{what} eigenvalue".lstrip()
            warnings.warn(
                f"{where} {values[members[0]]:.6g} has conflicting targets "
                f"{sorted(set(g.tolist()))}; using their mean",
                ConflictWarning,
                stacklevel=3,
            )
        nodes.append(float(values[members].mean()))
        goals.append(float(g.mean()))
        weights.append(float(len(members)) if weight_by_multiplicity else 1.0)
    return np.array(nodes), np.array(goals), np.array(weights)


def _solve(phi: np.ndarray, g: np.ndarray, weights: np.ndarray | None = None, warn=SingularDesign):
    w = np.ones(len(g)) if weights is None else np.sqrt(weights)
    a = phi * w[:, None]
    b = g * w
    # equilibrate columns; powers of a Laplacian span many orders of magnitude.
    # Columns that are round-off relative to the largest are dropped.
    norms = np.linalg.norm(a, axis=0)
    keep = norms > 1e-12 * norms.max(initial=0.0)
    scale = np.zeros_like(norms)
    scale[keep] = 1.0 / norms[keep]
    coef = np.zeros(a.shape[1])
    rank, sv = 0, np.zeros(0)
    if keep.any():
        sub, _, rank, sv = scipy.linalg.lstsq(a[:, keep] * scale[keep], b, lapack_driver="gelsd")
        coef[keep] = sub * scale[keep]
        rank = int(rank)
    if rank < min(a.shape):
        warnings.warn(
            f"system of shape {a.shape} has numerical rank {rank}; using the minimum-norm solution",
            warn,
            stacklevel=3,
        )
    cond = float(sv[0] / sv[rank - 1]) if rank else float("inf")
    residual = float(np.linalg.norm(a @ coef - b))
    return coef, rank, cond, residual


def design_fir(
    spectrum: Spectrum,
    spec: DesignSpec,
    length: int,
    weight_by_multiplicity: bool = False,
    rtol: float = 1e-8,
) -> tuple[FirFilter, DesignReport]:
    """Fit ``h`` so that ``sum_l h[l] lambda^l`` approximates the targets.

    One Vandermonde row per distinct eigenvalue.  With
    ``weight_by_multiplicity`` each row is weighted as if it were repeated
    once per eigenpair, which is the same as one row per eigenpair.
    """
    if length < 1:
        raise ValueError("filter length must be >= 1")
    if spec.targets.shape != (spectrum.n,):
        raise ValueError(f"need {spectrum.n} targets, got {spec.targets.shape[0]}")
    lam, g, w = _collapse(
        spectrum.eigenvalues, spec.targets, np.arange(spectrum.n), "", rtol, weight_by_multiplicity
    )
    phi = np.vander(lam, length, increasing=True)
    h, rank, cond, residual = _solve(phi, g, w)
    report = DesignReport(residual, cond, rank, phi.shape[0], length, {"family": "fir", "length": length})
    return FirFilter(h), report


def design_sv(
    spectrum: Spectrum,
    spec: DesignSpec,
    l1: int,
    l2: int,
    weight_by_multiplicity: bool = False,
    rtol: float = 1e-8,
) -> tuple[SvFilter, DesignReport]:
    """Fit ``(h0, alpha, beta)`` of a subspace-varying filter.

    The system has an all-ones column, a gradient block ``lambda_G^j``
    (j = 1..l1), a curl block ``lambda_C^j`` (j = 1..l2), one row per distinct
    gradient and curl frequency, and one harmonic row if the harmonic space is
    nonzero.
    """
    if l1 < 0 or l2 < 0:
        raise ValueError("l1 and l2 must be >= 0")
    if spec.targets.shape != (spectrum.n,):
        raise ValueError(f"need {spectrum.n} targets, got {spec.targets.shape[0]}")
    lam, t = spectrum.eigenvalues, spec.targets
    ncoef = 1 + l1 + l2
    blocks, goals, weights = [], [], []

    hq = spectrum.q_h
    if hq.size:
        g_h = t[hq]
        if np.ptp(g_h) > 0:
            warnings.warn(
                f"harmonic targets differ {sorted(set(g_h.tolist()))}; using their mean",
                ConflictWarning,
                stacklevel=2,
            )
        row = np.zeros((1, ncoef))
        row[0, 0] = 1.0
        blocks.append(row)
        goals.append([g_h.mean()])
        weights.append([float(hq.size) if weight_by_multiplicity else 1.0])

    for label, offset, order in ((Label.GRADIENT, 1, l1), (Label.CURL, 1 + l1, l2)):
        idx = spectrum.indices(label)
        if not idx.size:
            continue
        nodes, g, w = _collapse(lam, t, idx, label.value.lower(), rtol, weight_by_multiplicity)
        rows = np.zeros((nodes.size, ncoef))
        rows[:, 0] = 1.0
        if order:
            rows[:, offset:offset + order] = np.vander(nodes, order + 1, increasing=True)[:, 1:]
        blocks.append(rows)
        goals.append(g)
        weights.append(w)

    phi = np.vstack(blocks)
    coef, rank, cond, residual = _solve(phi, np.concatenate(goals), np.concatenate(weights))
    filt = SvFilter(coef[0], coef[1:1 + l1], coef[1 + l1:])
    report = DesignReport(residual, cond, rank, phi.shape[0], ncoef, {"family": "sv", "l1": l1, "l2": l2})
    return filt, report


# ----------------------------------------------------------------------------
# data-driven fitting


def _powers(mat, f: np.ndarray, order: int) -> list[np.ndarray]:
    out = []
    y = f
    for _ in range(order):
        y = mat @ y
        out.append(y)
    return out


def fir_data_matrix(lap: HodgeLaplacians, f: np.ndarray, length: int) -> np.ndarray:
    """Columns ``[f, L1 f, ..., L1^(length-1) f]``."""
    f = np.asarray(f, dtype=float)
    return np.column_stack([f] + _powers(lap.l1, f, length - 1))


def sv_data_matrix(lap: HodgeLaplacians, f: np.ndarray, l1: int, l2: int) -> np.ndarray:
    """Columns ``[f | L_lower f ... L_lower^l1 f | L_upper f ... L_upper^l2 f]``."""
    f = np.asarray(f, dtype=float)
    return np.column_stack([f] + _powers(lap.l1_lower, f, l1) + _powers(lap.l1_upper, f, l2))


def _stack(lap: HodgeLaplacians, pairs: Sequence, build):
    if not pairs:
        raise ValueError("need at least one (input, output) pair")
    mats, outs = [], []
    for f_in, f_out in pairs:
        f_in = np.asarray(f_in, dtype=float)
        f_out = np.asarray(f_out, dtype=float)
        if f_in.shape != (lap.n_edges,) or f_out.shape != (lap.n_edges,):
            raise ValueError(f"each flow must have shape ({lap.n_edges},)")
        mats.append(build(f_in))
        outs.append(f_out)
    return np.vstack(mats), np.concatenate(outs)


def fit_fir_from_data(lap: HodgeLaplacians, pairs: Sequence, length: int) -> tuple[FirFilter, DesignReport]:
    """Least-squares FIR coefficients mapping each input flow to its output.

    The per-pair shifted-signal matrices are stacked vertically.
    """
    if length < 1:
        raise ValueError("filter length must be >= 1")
    a, y = _stack(lap, pairs, lambda f: fir_data_matrix(lap, f, length))
    h, rank, cond, residual = _solve(a, y, warn=RankDeficientData)
    report = DesignReport(residual, cond, rank, a.shape[0], length, {"family": "fir", "length": length})
    return FirFilter(h), report


def fit_sv_from_data(lap: HodgeLaplacians, pairs: Sequence, l1: int, l2: int) -> tuple[SvFilter, DesignReport]:
    if l1 < 0 or l2 < 0:
        raise ValueError("l1 and l2 must be >= 0")
    a, y = _stack(lap, pairs, lambda f: sv_data_matrix(lap, f, l1, l2))
    c, rank, cond, residual = _solve(a, y, warn=RankDeficientData)
    report = DesignReport(residual, cond, rank, a.shape[0], 1 + l1 + l2, {"family": "sv", "l1": l1, "l2": l2})
    return SvFilter(c[0], c[1:1 + l1], c[1 + l1:]), report
