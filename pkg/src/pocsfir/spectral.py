"""M-point DFT pair and frequency grid bookkeeping.

Frequency-domain projectors work on the half spectrum (bins ``0..M//2``)
through :func:`half_forward` / :func:`half_inverse`; the mirrored bins are
implied by conjugate symmetry so coefficient vectors stay real.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, InvalidArgumentError, InvalidSpecError

#: Largest imaginary residue tolerated by :func:`inverse` before raising.
IMAG_RESIDUE_LIMIT = 1e-6

# band edges are compared with a little slack so that bins landing on an
# edge up to rounding (e.g. 2*pi*256/1024 vs 0.5*pi) count as inside
_EDGE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex samples ``H(w_k)`` at ``w_k = 2*pi*k/M``, ``k = 0..M-1``."""

    values: np.ndarray

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def __len__(self) -> int:
        return self.M

    def is_conjugate_symmetric(self, atol: float = 1e-9) -> bool:
        v = self.values
        return bool(np.allclose(v[1:], np.conj(v[1:][::-1]), rtol=0, atol=atol))


def forward(h, M: int) -> Spectrum:
    """Return the M-point DFT of the real vector ``h`` (which must have length M)."""
    h = np.asarray(h, dtype=float)
    if M < 2:
        raise InvalidArgumentError(f"transform length must be >= 2, got {M}")
    if h.ndim != 1 or h.shape[0] != M:
        raise InvalidArgumentError(f"expected a vector of length {M}, got shape {h.shape}")
    return Spectrum(np.fft.fft(h))


def inverse(H) -> np.ndarray:
    """Inverse DFT of a conjugate-symmetric spectrum, returned as a real vector.

    Raises
    ------
    ConsistencyError
        If any output entry has an imaginary part above ``IMAG_RESIDUE_LIMIT``;
        that means the spectrum was not the transform of a real vector.
    """
    values = H.values if isinstance(H, Spectrum) else np.asarray(H, dtype=complex)
    if values.ndim != 1 or values.shape[0] < 2:
        raise InvalidArgumentError(f"expected a spectrum of length >= 2, got shape {values.shape}")
    x = np.fft.ifft(values)
    residue = float(np.max(np.abs(x.imag)))
    if residue > IMAG_RESIDUE_LIMIT:
        raise ConsistencyError(
            f"inverse transform has imaginary residue {residue:.3e}; "
            "spectrum is not conjugate symmetric"
        )
    return x.real.copy()


def half_forward(h) -> np.ndarray:
    """Bins ``0..M//2`` of the DFT of a real vector."""
    return np.fft.rfft(h)


def half_inverse(G: np.ndarray, M: int) -> np.ndarray:
    """Real length-M vector whose half spectrum is ``G`` (mirror bins by conjugation)."""
    return np.fft.irfft(G, n=M)


def bin_frequencies(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


def _mirror(half_idx: np.ndarray, M: int) -> np.ndarray:
    # bin 0 and (for even M) bin M/2 are their own mirrors
    tail = M - half_idx[(half_idx > 0) & (2 * half_idx != M)]
    return np.union1d(half_idx, tail)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Partition of the M DFT bins into passband, stopband and transition bins.

    ``passband_half`` / ``stopband_half`` hold the bins in ``0..M//2``;
    ``passband_bins`` / ``stopband_bins`` add their conjugate mirrors.
    """

    M: int
    omega_p: float
    omega_s: float
    passband_half: np.ndarray
    stopband_half: np.ndarray
    passband_bins: np.ndarray
    stopband_bins: np.ndarray

    @property
    def bin_freqs(self) -> np.ndarray:
        return bin_frequencies(self.M)

    @property
    def transition_bins(self) -> np.ndarray:
        used = np.union1d(self.passband_bins, self.stopband_bins)
        return np.setdiff1d(np.arange(self.M), used)

    @classmethod
    def from_edges(cls, M: int, omega_p: float, omega_s: float) -> "FrequencyGrid":
        """Build a grid from raw band edges (radians).

        ``omega_p = 0`` is accepted here (only bin 0 is in the passband);
        :class:`~pocsfir.projectors.FilterSpec` demands strictly positive edges.
        """
        if M < 2:
            raise InvalidArgumentError(f"transform length must be >= 2, got {M}")
        if not 0.0 <= omega_p < omega_s <= np.pi:
            raise InvalidSpecError(
                f"band edges must satisfy 0 <= omega_p < omega_s <= pi, "
                f"got omega_p={omega_p}, omega_s={omega_s}",
                field="omega_p",
            )
        half = np.arange(M // 2 + 1)
        w = 2.0 * np.pi * half / M
        p_half = half[w <= omega_p + _EDGE_EPS]
        s_half = half[w >= omega_s - _EDGE_EPS]
        return cls(
            M=M,
            omega_p=float(omega_p),
            omega_s=float(omega_s),
            passband_half=p_half,
            stopband_half=s_half,
            passband_bins=_mirror(p_half, M),
            stopband_bins=_mirror(s_half, M),
        )


@lru_cache(maxsize=64)
def _cached_grid(M: int, omega_p: float, omega_s: float) -> FrequencyGrid:
    return FrequencyGrid.from_edges(M, omega_p, omega_s)


def build_grid(spec) -> FrequencyGrid:
    """Frequency grid for a :class:`~pocsfir.projectors.FilterSpec` (cached)."""
    if spec.omega_p >= spec.omega_s:
        raise InvalidSpecError(
            f"omega_p ({spec.omega_p}) must be below omega_s ({spec.omega_s})", field="omega_p"
        )
    return _cached_grid(int(spec.M), float(spec.omega_p), float(spec.omega_s))


def amplitude_response(h, M: int) -> np.ndarray:
    """``|H(w_k)|`` on the half grid ``k = 0..M//2`` for a real tap vector.

    ``h`` may be shorter than M (it is zero padded).
    """
    h = np.asarray(h, dtype=float)
    if h.shape[0] > M:
        raise InvalidArgumentError(f"{h.shape[0]} taps do not fit in a {M}-point transform")
    return np.abs(np.fft.rfft(h, n=M))
