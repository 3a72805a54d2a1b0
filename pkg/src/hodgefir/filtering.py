"""FIR and subspace-varying filters on edge flows.

Filters are applied by repeated local shifts (sparse products with the Hodge
Laplacians), accumulated Horner-style.  Dense powers of a Laplacian are never
formed.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complex import HodgeLaplacians
from .spectral import Label, Spectrum

__all__ = [
    "FirFilter",
    "SvFilter",
    "FrequencyResponse",
    "OpCounter",
    "diagnostics",
    "shift",
    "apply_fir",
    "apply_sv",
    "apply_filter",
    "response_fir",
    "response_sv",
    "response",
    "apply_regularized_inverse",
]


@dataclass(frozen=True)
class FirFilter:
    """Polynomial ``sum_l h[l] L1^l`` of length ``len(h)``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=float))
        if h.ndim != 1 or h.size < 1:
            raise ValueError("FIR filter needs at least one coefficient")
        if not np.all(np.isfinite(h)):
            raise ValueError("FIR coefficients must be finite")
        object.__setattr__(self, "h", h)

    @property
    def length(self) -> int:
        return self.h.size

    def to_dict(self) -> dict:
        return {"h": [float(x) for x in self.h]}


@dataclass(frozen=True)
class SvFilter:
    """``h0 I + sum_k alpha[k-1] L_lower^k + sum_k beta[k-1] L_upper^k``.

    Empty ``alpha`` or ``beta`` drop the corresponding sum.
    """

    h0: float
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float)).ravel()
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).ravel()
        h0 = float(self.h0)
        if not (np.isfinite(h0) and np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise ValueError("SV coefficients must be finite")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def l1(self) -> int:
        return self.alpha.size

    @property
    def l2(self) -> int:
        return self.beta.size

    @property
    def length(self) -> int:
        return 1 + self.l1 + self.l2

    def to_dict(self) -> dict:
        return {
            "h0": self.h0,
            "alpha": [float(x) for x in self.alpha],
            "beta": [float(x) for x in self.beta],
        }


@dataclass(frozen=True)
class FrequencyResponse:
    values: np.ndarray
    spectrum: Spectrum = field(repr=False)


# ----------------------------------------------------------------------------
# diagnostics: arithmetic operation counting, off unless enabled


class OpCounter:
    """Tallies floating-point operations of filter applications.

    A sparse product with ``k`` columns costs ``2 * nnz * k``; a scaled
    vector update costs ``2 * size``.
    """

    def __init__(self):
        self.flops = 0
        self.shifts = 0

    def matvec(self, mat, x) -> None:
        cols = 1 if x.ndim == 1 else x.shape[1]
        self.flops += 2 * mat.nnz * cols
        self.shifts += 1

    def axpy(self, x) -> None:
        self.flops += 2 * x.size


_counter: contextvars.ContextVar[OpCounter | None] = contextvars.ContextVar("hodgefir_counter", default=None)


@contextlib.contextmanager
def diagnostics():
    """Count operations of every filter application inside the block.

    >>> with diagnostics() as ops:
    ...     apply_fir(filt, lap, f)      # doctest: +SKIP
    >>> ops.flops                        # doctest: +SKIP
    """
    counter = OpCounter()
    token = _counter.set(counter)
    try:
        yield counter
    finally:
        _counter.reset(token)


def _mv(mat, x):
    c = _counter.get()
    if c is not None:
        c.matvec(mat, x)
    return mat @ x


def _axpy(a, x, y):
    c = _counter.get()
    if c is not None:
        c.axpy(x)
    return y + a * x


def _flow(lap: HodgeLaplacians, flow) -> np.ndarray:
    f = np.asarray(flow, dtype=float)
    if f.shape[0] != lap.n_edges:
        raise ValueError(f"flow has {f.shape[0]} entries, complex has {lap.n_edges} edges")
    return f


# ----------------------------------------------------------------------------
# application


def shift(lap: HodgeLaplacians, flow) -> tuple[np.ndarray, np.ndarray]:
    """One lower shift ``L_lower f`` and one upper shift ``L_upper f``.

    Their sum is the ``L1`` shift.  Each edge only reads its own value and
    those of its lower or upper neighbors.
    """
    f = _flow(lap, flow)
    return _mv(lap.l1_lower, f), _mv(lap.l1_upper, f)


def _horner(mat: sp.spmatrix, coeffs: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``sum_l coeffs[l] mat^l f`` with ``len(coeffs) - 1`` shifts."""
    y = coeffs[-1] * f
    for c in coeffs[-2::-1]:
        y = _axpy(c, f, _mv(mat, y))
    return y


def apply_fir(filt: FirFilter, lap: HodgeLaplacians, flow) -> np.ndarray:
    """Filter output ``sum_l h[l] L1^l f``.

    ``flow`` may be a single flow or an ``(N1, k)`` stack of flows.
    """
    return _horner(lap.l1, filt.h, _flow(lap, flow))


def apply_sv(filt: SvFilter, lap: HodgeLaplacians, flow) -> np.ndarray:
    f = _flow(lap, flow)
    out = filt.h0 * f
    # two independent recursions, one per Laplacian part; the leading zero
    # stands for the missing identity term of each sum
    if filt.l1:
        out = out + _horner(lap.l1_lower, np.concatenate([[0.0], filt.alpha]), f)
    if filt.l2:
        out = out + _horner(lap.l1_upper, np.concatenate([[0.0], filt.beta]), f)
    return out


def apply_filter(filt: FirFilter | SvFilter, lap: HodgeLaplacians, flow) -> np.ndarray:
    if isinstance(filt, FirFilter):
        return apply_fir(filt, lap, flow)
    if isinstance(filt, SvFilter):
        return apply_sv(filt, lap, flow)
    raise TypeError(f"not a filter: {type(filt).__name__}")


# ----------------------------------------------------------------------------
# frequency responses


def response_fir(filt: FirFilter, spectrum: Spectrum) -> FrequencyResponse:
    values = np.polynomial.polynomial.polyval(spectrum.eigenvalues, filt.h)
    return FrequencyResponse(values=values, spectrum=spectrum)


def response_sv(filt: SvFilter, spectrum: Spectrum) -> FrequencyResponse:
    lam = spectrum.eigenvalues
    values = np.full(lam.shape, filt.h0)
    g = spectrum.q_g
    c = spectrum.q_c
    if filt.l1:
        values[g] += np.polynomial.polynomial.polyval(lam[g], np.concatenate([[0.0], filt.alpha]))
    if filt.l2:
        values[c] += np.polynomial.polynomial.polyval(lam[c], np.concatenate([[0.0], filt.beta]))
    return FrequencyResponse(values=values, spectrum=spectrum)


def response(filt: FirFilter | SvFilter, spectrum: Spectrum) -> FrequencyResponse:
    if isinstance(filt, FirFilter):
        return response_fir(filt, spectrum)
    return response_sv(filt, spectrum)


# ----------------------------------------------------------------------------
# regularized low-pass baselines


def apply_regularized_inverse(lap: HodgeLaplacians, flow, mu: float = 0.5, which: str = "full") -> np.ndarray:
    """Solve ``(I + mu L) x = f`` with ``L`` the full or the lower 1-Laplacian.

    The frequency response is ``1 / (1 + mu * lambda)``.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if which == "full":
        mat = lap.l1
    elif which == "lower":
        mat = lap.l1_lower
    else:
        raise ValueError(f"which must be 'full' or 'lower', got {which!r}")
    f = _flow(lap, flow)
    system = (sp.identity(lap.n_edges, format="csc") + mu * mat).tocsc()
    x = spla.spsolve(system, f)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("regularized solve failed")
    return x.reshape(f.shape)


def response_regularized(spectrum: Spectrum, mu: float = 0.5, which: str = "full") -> np.ndarray:
    """Response of :func:`apply_regularized_inverse` at each eigenvalue."""
    lam = spectrum.eigenvalues
    if which == "lower":
        lam = np.where(np.array([lab is Label.GRADIENT for lab in spectrum.labels]), lam, 0.0)
    return 1.0 / (1.0 + mu * lam)
