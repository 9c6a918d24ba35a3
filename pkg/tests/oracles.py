"""Reference solutions built independently of the solver."""

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import j1


def gaussian_amplitude(duration):
    """Continuous amplitude with intensity FWHM ``duration`` and unit peak."""
    sigma = duration / (2 * math.sqrt(math.log(2)))
    return sigma, lambda t: math.exp(-t * t / (2 * sigma * sigma))


def bessel_output(times, duration, beta, scale=1.0):
    """Resonant slab of area ``beta = b d``: impulse response delta - sqrt(beta/t) J1(2 sqrt(beta t))."""
    sigma, a = gaussian_amplitude(duration)

    def kernel(tau):
        if tau < 1e-15:
            return beta
        return math.sqrt(beta / tau) * j1(2 * math.sqrt(beta * tau))

    out = []
    for t in times:
        upper = max(t + 8 * sigma, 0.0)
        conv = quad(lambda tau: kernel(tau) * a(t - tau), 0.0, upper, limit=400)[0] if upper > 0 else 0.0
        out.append(scale * (a(t) - conv))
    return np.array(out)


def spectral_output(samples, dt, medium, pad=2 ** 19):
    """Exact frequency-domain transfer of a time-invariant comb (no events, no Doppler).

    Each section multiplies the spectrum by ``exp(-b d / (gamma + i (w - delta_m)))``.
    """
    n = len(samples)
    spec = np.fft.fft(samples, pad)
    w = 2 * math.pi * np.fft.fftfreq(pad, dt)
    H = np.ones(pad, dtype=complex)
    for m in medium.indices:
        delta = -m * medium.delta_omega_c
        H *= np.exp(-medium.b * medium.d / (medium.gamma31 + 1j * (w - delta)))
    return np.fft.ifft(spec * H)[:n]
