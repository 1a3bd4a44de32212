"""Synthetic input/output pairs for experiments.

Random draws use PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream,))``
so each consumer gets its own reproducible stream regardless of what the
others draw:

    stream 0  input noise
    stream 1  target noise (``kind = "noise"``)
    stream 2  initial-parameter jitter
"""

import numpy as np

from ..errors import StabilityError, ConfigError
from ..spectrum import dft
from ..ssm import DiagonalSSM, StackedSSM, simulate_freq

INPUT_STREAM = 0
TARGET_STREAM = 1
INIT_STREAM = 2


def rng_for(seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sinusoid_signal(items, L):
    """Real signal sum_j amplitude_j cos(2 pi bin_j t / L + phase_j)."""
    t = np.arange(L)
    u = np.zeros(L)
    for item in items:
        u += item["amplitude"] * np.cos(2 * np.pi * item["bin"] * t / L + item["phase"])
    return u


def time_signals(data):
    """Real time-domain (u, y). For teacher data y is the circular response."""
    L, seed = data["L"], data["seed"]
    u = sinusoid_signal(data["sinusoids"], L)
    if data["noise_scale"] > 0:
        u = u + data["noise_scale"] * rng_for(seed, INPUT_STREAM).standard_normal(L)
    if data["kind"] == "teacher":
        U = dft(u)
        Y = simulate_freq(teacher_model(data), U)
        return u, np.fft.ifft(Y).real
    if data["kind"] == "sinusoids":
        return u, sinusoid_signal(data["target_sinusoids"], L)
    y = data["noise_scale"] * rng_for(seed, TARGET_STREAM).standard_normal(L)
    return u, y


def teacher_model(data):
    t = data["teacher"]
    try:
        return DiagonalSSM(t["a"], t["b"], t["c"])
    except StabilityError as exc:
        raise ConfigError("data.teacher", str(exc)) from exc


def generate_data(data):
    """Spectra (U, Y) of the configured pair.

    Teacher targets are formed directly in the frequency domain as
    Y = H_teacher * U, so they are exactly realisable by a student of the
    same form.
    """
    u, y = time_signals(data)
    U = dft(u)
    if data["kind"] == "teacher":
        return U, simulate_freq(teacher_model(data), U)
    return U, dft(y)


def initial_model(cfg):
    """Student stack from ``model.init``, with optional seeded jitter on b and c."""
    model = cfg["model"]
    rng = rng_for(cfg["data"]["seed"], INIT_STREAM)
    layers = []
    for spec in model["init"]:
        b = np.array(spec["b0"])
        c = np.array(spec["c0"])
        if spec["jitter"] > 0:
            b = b + spec["jitter"] * rng.standard_normal(b.size)
            c = c + spec["jitter"] * rng.standard_normal(c.size)
        try:
            layers.append(DiagonalSSM(spec["a0"], b, c))
        except StabilityError as exc:
            raise ConfigError("model.init.a0", str(exc)) from exc
    return StackedSSM(tuple(layers))
