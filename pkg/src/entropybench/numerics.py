"""Special functions and transforms backing the statistical tests.

Everything here is a pure function of its arguments: no state, no RNG,
safe to call from any thread.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["erfc", "igamc", "dft_moduli"]

# Iteration controls for the incomplete-gamma evaluation.  The series and
# continued fraction both terminate well before _ITMAX for the arguments the
# battery produces (a up to a few thousand); the cap only guards divergence
# on pathological input.
_EPS = 1e-15
_ITMAX = 20000
_FPMIN = 1e-300


def erfc(x: float) -> float:
    """Complementary error function.

    Delegates to the C library implementation, which is accurate to double
    precision over the full range used by the tests (absolute error well
    below 1e-12 for |x| <= 10).
    """
    return math.erfc(x)


def _igamc_series(a: float, x: float, gln: float) -> float:
    # Lower-tail series around the origin: converges fastest for x < a + 1.
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    p = total * math.exp(-x + a * math.log(x) - gln)
    return 1.0 - p


def _igamc_contfrac(a: float, x: float, gln: float) -> float:
    # Upper-tail continued fraction, evaluated with the modified Lentz
    # scheme: converges fastest for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - gln) * h


def igamc(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x).

    Series expansion for x < a + 1, continued fraction otherwise (the
    switchover at a + 1 keeps both expansions in their fast-convergence
    region).  Q(a, 0) = 1 exactly.

    Args:
        a: shape parameter, must be > 0.
        x: evaluation point, must be >= 0.

    Returns:
        Q(a, x) in [0, 1].

    Raises:
        ValueError: for a <= 0 or x < 0.
    """
    if not (a > 0.0) or math.isinf(a):
        raise ValueError(f"igamc requires a > 0, got a={a}")
    if not (x >= 0.0) or math.isinf(x):
        raise ValueError(f"igamc requires finite x >= 0, got x={x}")
    if x == 0.0:
        return 1.0
    gln = math.lgamma(a)
    if x < a + 1.0:
        q = _igamc_series(a, x, gln)
    else:
        q = _igamc_contfrac(a, x, gln)
    # Clamp float residue so callers always see a probability.
    return min(1.0, max(0.0, q))


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _bluestein_tables(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    # Chirp factors for length n, plus the FFT of the convolution kernel at
    # the padded power-of-two length.  The quadratic phase index is reduced
    # mod 2n before the complex exponential so large n does not lose
    # precision to giant angles.
    j = np.arange(n, dtype=np.int64)
    chirp = np.exp(-1j * np.pi * ((j * j) % (2 * n)) / n)
    size = _next_pow2(2 * n - 1)
    kernel = np.zeros(size, dtype=np.complex128)
    kernel[:n] = np.conj(chirp)
    kernel[size - n + 1:] = np.conj(chirp[1:][::-1])
    return chirp, np.fft.fft(kernel), size


# Keyed by n; dict operations are atomic under the GIL and entries are
# immutable once stored, so concurrent callers at worst recompute a table.
_TABLE_CACHE: dict[int, tuple[np.ndarray, np.ndarray, int]] = {}
_TABLE_CACHE_MAX = 8


def _cached_tables(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    tables = _TABLE_CACHE.get(n)
    if tables is None:
        if len(_TABLE_CACHE) >= _TABLE_CACHE_MAX:
            _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
        tables = _bluestein_tables(n)
        _TABLE_CACHE[n] = tables
    return tables


def dft_moduli(signal) -> np.ndarray:
    """Moduli of the first floor(n/2) discrete Fourier coefficients.

    Valid for arbitrary length n: lengths that are not powers of two go
    through a Bluestein chirp reduction to a power-of-two convolution, so no
    truncation or value-changing zero padding ever happens.  Power-of-two
    lengths take the direct FFT path.

    Args:
        signal: real-valued sequence (the tests feed +-1 values), length >= 2.

    Returns:
        float array of length floor(n/2) with |X_0| .. |X_{n/2-1}|.

    Raises:
        ValueError: for length < 2.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    n = x.size
    if n < 2:
        raise ValueError(f"dft_moduli requires length >= 2, got {n}")
    if n & (n - 1) == 0:
        return np.abs(np.fft.fft(x)[: n // 2])
    chirp, kernel_fft, size = _cached_tables(n)
    a = np.zeros(size, dtype=np.complex128)
    a[:n] = x * chirp
    conv = np.fft.ifft(np.fft.fft(a) * kernel_fft)
    return np.abs(chirp[: n // 2] * conv[: n // 2])
