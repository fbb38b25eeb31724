"""Independent high-precision references built on mpmath."""

from __future__ import annotations

import mpmath as mp


def wright_mp(z: float, rho: float, beta: float) -> float:
    """Wright series summed with enough digits to absorb the cancellation."""
    z, rho, beta = mp.mpf(z), mp.mpf(rho), mp.mpf(beta)
    with mp.workdps(120):
        peak, k_peak, k, small = mp.mpf(0), 0, 0, 0
        cutoff = mp.mpf(10) ** -80
        while True:
            a = abs(z) ** k / mp.factorial(k) * abs(mp.rgamma(rho * k + beta))
            if a > peak:
                peak, k_peak = a, k
            small = small + 1 if a < cutoff else 0
            if k > k_peak and small >= 5:
                break
            k += 1
    dps = int(mp.log10(max(peak, 1))) + 100
    with mp.workdps(dps):
        return float(mp.fsum(z**j / mp.factorial(j) * mp.rgamma(rho * j + beta) for j in range(k + 1)))


def rgamma_mp(x: float) -> float:
    with mp.workdps(40):
        return float(mp.rgamma(mp.mpf(x)))


def erf_mp(x: float) -> float:
    with mp.workdps(40):
        return float(mp.erf(mp.mpf(x)))
