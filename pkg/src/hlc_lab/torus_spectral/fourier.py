"""Fourier collocation on the unit circle ``R/Z`` with ``N`` equispaced nodes."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def nodes(N: int) -> np.ndarray:
    return np.arange(N) / N


def wavenumbers(N: int) -> np.ndarray:
    """Integer wavenumbers in FFT order with the Nyquist entry set to zero."""
    k = np.fft.fftfreq(N, 1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return k


def free_modes(N: int) -> np.ndarray:
    """Wavenumbers ``|k| < N/2`` (no Nyquist mode), ascending."""
    h = (N - 1) // 2
    return np.arange(-h, h + 1)


@lru_cache(maxsize=32)
def diff_matrix(N: int) -> np.ndarray:
    """Real skew matrix differentiating the trigonometric interpolant (period 1).

    The Nyquist mode is dropped, so the matrix is exact on ``|k| < N/2``.
    """
    k = wavenumbers(N)
    D = np.fft.ifft(2j * np.pi * k[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0).real
    D = 0.5 * (D - D.T)
    D.setflags(write=False)
    return D


@lru_cache(maxsize=32)
def free_basis(N: int) -> np.ndarray:
    """Orthonormal (under ``sum_j |u_j|^2``) columns ``exp(2 pi i k x_j)/sqrt(N)``, ``|k| < N/2``."""
    E = np.exp(2j * np.pi * np.outer(nodes(N), free_modes(N))) / np.sqrt(N)
    E.setflags(write=False)
    return E


def diff(f: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """Spectral derivative along ``axis`` (Nyquist dropped)."""
    N = f.shape[axis]
    shape = [1] * f.ndim
    shape[axis] = N
    symbol = (2j * np.pi * wavenumbers(N)).reshape(shape) ** order
    out = np.fft.ifft(symbol * np.fft.fft(f, axis=axis), axis=axis)
    return out.real if np.isrealobj(f) else out


def interpolate_2d(samples: np.ndarray, y1: np.ndarray, y2: np.ndarray, deriv=(0, 0)) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``samples`` (or a derivative) on ``y1 x y2``.

    The Nyquist coefficient of an even-sized sample grid is split evenly
    between ``+N/2`` and ``-N/2`` so the interpolant stays real.
    """
    M1, M2 = samples.shape
    c = np.fft.fft2(samples) / (M1 * M2)

    def factors(M, y, order):
        k = np.fft.fftfreq(M, 1.0 / M)
        F = np.exp(2j * np.pi * np.outer(y, k)) * (2j * np.pi * k) ** order
        if M % 2 == 0:
            # split the Nyquist term: c_{N/2}(e^{i pi N y} + e^{-i pi N y}) / 2
            kn = M // 2
            F[:, kn] = 0.5 * (np.exp(2j * np.pi * kn * y) * (2j * np.pi * kn) ** order
                              + np.exp(-2j * np.pi * kn * y) * (-2j * np.pi * kn) ** order)
        return F

    F1 = factors(M1, np.asarray(y1, float), deriv[0])
    F2 = factors(M2, np.asarray(y2, float), deriv[1])
    return (F1 @ c @ F2.T).real
