"""Synthetic signals shared by the tests."""

import numpy as np

from rirlab.core import ImpulseResponse


def exp_decay(rt60, fs=48000, duration=None, noise=False, seed=0):
    """Response whose energy falls 60 dB every ``rt60`` seconds.

    Deterministic envelope ``h[n]**2 = 10**(-6 n / (rt60 fs))`` unless
    ``noise`` is set, in which case the envelope modulates white noise.
    """
    duration = duration or 2.0 * rt60
    n = np.arange(int(duration * fs))
    env = 10.0 ** (-3.0 * n / (rt60 * fs))
    if noise:
        env = env * np.random.default_rng(seed).standard_normal(len(n))
    return ImpulseResponse(env, fs)


def impulses(times_amps, fs=48000, duration=0.5):
    h = np.zeros(int(duration * fs))
    for t, a in times_amps:
        h[int(round(t * fs))] += a
    return ImpulseResponse(h, fs)


def sine(freq, fs=48000, duration=1.0, amp=1.0):
    t = np.arange(int(duration * fs)) / fs
    return ImpulseResponse(amp * np.sin(2 * np.pi * freq * t), fs)
