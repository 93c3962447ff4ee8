"""Analytical BER model and its inversions to SNR and symbol power.

The bit error rate of an uncoded stream follows the standard two-
parameter family

    psi(snr) = min(0.5, (a / log2(M)) * Q(sqrt(b * snr)))

with coefficients ``(a, b)`` set by the modulation. Inverting the
monotone branch gives the SNR, and with the channel state the symbol
power, needed for a target BER:

    q = sigma^2 / (b * |h|^2) * Qinv(psi * log2(M) / a)^2

Shipped presets (Gray-coded nearest-neighbour approximations; both are
configuration inputs and can be overridden):

    bpsk   M=2,  a=1, b=2      (exact)
    8qam   M=8,  a=2, b=6/7    (rectangular-constellation approximation)
    16qam  M=16, a=3, b=0.2    (square QAM: a=4(1-1/sqrt(M)), b=3/(M-1))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelState
from .errors import DomainError
from .numerics import q_function, q_inverse

__all__ = [
    "ModulationScheme",
    "PRESETS",
    "preset",
    "PSI_FLOOR",
    "zero_power_ber",
    "ber_from_snr",
    "snr_from_ber",
    "power_from_ber",
]

# BERs are clamped to [PSI_FLOOR, 0.5] before inversion so Q^-1 stays finite.
PSI_FLOOR = 1e-15


@dataclass(frozen=True)
class ModulationScheme:
    """Modulation order plus the ``(a, b)`` BER-curve coefficients."""

    name: str
    M: int
    a: float
    b: float

    def __post_init__(self) -> None:
        if self.M < 2 or (self.M & (self.M - 1)) != 0:
            raise DomainError(f"M must be a power of two >= 2, got {self.M}")
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise DomainError(f"a must be finite and > 0, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            raise DomainError(f"b must be finite and > 0, got {self.b}")

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1


PRESETS = {
    "bpsk": ModulationScheme("bpsk", 2, 1.0, 2.0),
    "8qam": ModulationScheme("8qam", 8, 2.0, 6.0 / 7.0),
    "16qam": ModulationScheme("16qam", 16, 3.0, 0.2),
}


def preset(name: str) -> ModulationScheme:
    """Look up a shipped scheme by name (case-insensitive)."""
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise DomainError(
            f"unknown modulation preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def zero_power_ber(m: ModulationScheme) -> float:
    """BER at zero allocated power, ``min(0.5, a / (2 log2 M))``.

    This is the top of the invertible branch: errors above it cannot
    occur at any power, below it the BER-power map is strictly monotone.
    """
    return min(0.5, 0.5 * m.a / m.bits_per_symbol)


def ber_from_snr(m: ModulationScheme, snr_value):
    """BER at a given (linear) SNR; clamped to at most 0.5.

    Strictly decreasing in ``snr`` wherever below the clamp. Accepts
    scalars or arrays.
    """
    arr = np.asarray(snr_value, dtype=float)
    if arr.size and (np.any(arr < 0.0) or not np.all(np.isfinite(arr))):
        raise DomainError("snr must be finite and >= 0")
    psi = np.minimum(0.5, (m.a / m.bits_per_symbol) * q_function(np.sqrt(arr * m.b)))
    return float(psi) if np.ndim(snr_value) == 0 else psi


def snr_from_ber(m: ModulationScheme, psi):
    """SNR achieving the target BER ``psi``.

    ``psi`` must lie in ``(0, zero_power_ber(m)]``; the boundary maps to
    SNR 0. Values below ``PSI_FLOOR`` are clamped before inversion. A
    target above the branch is unreachable at any power (it is already
    beaten for free) and raises :class:`DomainError`.
    """
    arr = np.asarray(psi, dtype=float)
    top = zero_power_ber(m)
    if arr.size and (np.any(arr <= 0.0) or np.any(arr > top) or not np.all(np.isfinite(arr))):
        raise DomainError(
            f"target BER must lie in (0, {top:g}] for {m.name}; "
            "larger values are met at zero power"
        )
    clamped = np.maximum(arr, PSI_FLOOR)
    x = q_inverse(clamped * (m.bits_per_symbol / m.a))
    out = np.asarray(x, dtype=float) ** 2 / m.b
    return float(out) if np.ndim(psi) == 0 else out


def power_from_ber(m: ModulationScheme, state: ChannelState, psi):
    """Symbol power (watts) achieving BER ``psi`` over ``state``.

    Equal to ``sigma^2 / (b |h|^2) * Qinv(psi log2(M) / a)^2``; zero at
    the zero-power boundary BER and increasing without bound as
    ``psi -> 0``.
    """
    return snr_from_ber(m, psi) * (state.noise_w / state.gain)
