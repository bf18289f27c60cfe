"""Independent samplers and membership checks for the convex constraint sets.

None of this calls the projectors under test. The minimal-distance oracle
compares ``||x - P x||`` against ``||x - c||`` for sampled members ``c``:
half of them are far random members, half are short convex steps from
``P x`` towards a random member, which probes the variational inequality
``<x - Px, c - Px> <= 0`` locally.
"""

import numpy as np
from scipy.linalg import convolution_matrix

from pocsfir import projectors as pj

M = 128
N = 15


def spec():
    return pj.FilterSpec(N, 0.1, 0.05, 0.3 * np.pi, 0.5 * np.pi, M)


def _bands(fs):
    half = np.arange(fs.M // 2 + 1)
    w = 2 * np.pi * half / fs.M
    return half[w <= fs.omega_p + 1e-12], half[w >= fs.omega_s - 1e-12]


def _linear_phase(fs, k):
    return np.exp(-1j * (2 * np.pi * k / fs.M) * (fs.N - 1) / 2)


class SetModel:
    """A convex set: projector, random-member sampler and membership residual."""

    def __init__(self, name, project, sample, residual, scale=1.0):
        self.name = name
        self.project = project
        self.sample = sample
        self.residual = residual
        self.scale = scale

    def random_input(self, rng):
        return self.scale * rng.standard_normal(M)


def symmetry_model():
    def sample(rng):
        h = np.zeros(M)
        head = rng.standard_normal(N)
        h[:N] = head + head[::-1]
        return h

    def residual(h):
        return max(np.max(np.abs(h[:N] - h[:N][::-1])), np.max(np.abs(h[N:]), initial=0.0))

    return SetModel("symmetry", lambda g: pj.project_symmetry(g, N), sample, residual)


def support_model():
    def sample(rng):
        h = np.zeros(M)
        h[:N] = rng.standard_normal(N)
        return h

    def residual(h):
        return np.max(np.abs(h[N:]), initial=0.0)

    return SetModel("support", lambda g: pj.project_support(g, N), sample, residual)


def passband_model():
    fs = spec()
    p, _ = _bands(fs)
    u = _linear_phase(fs, p)

    def sample(rng):
        G = np.fft.rfft(rng.standard_normal(M))
        G[p] = rng.uniform(1 - fs.alpha, 1 + fs.alpha, p.shape[0]) * u
        return np.fft.irfft(G, n=M)

    def residual(h):
        z = np.fft.rfft(h)[p] * np.conj(u)
        return max(
            np.max(np.abs(z.imag)),
            np.max(np.maximum(z.real - (1 + fs.alpha), 0)),
            np.max(np.maximum((1 - fs.alpha) - z.real, 0)),
        )

    return SetModel("passband", lambda g: pj.project_passband(g, fs), sample, residual, scale=0.3)


def stopband_model():
    fs = spec()
    _, s = _bands(fs)

    def sample(rng):
        G = np.fft.rfft(rng.standard_normal(M))
        mag = fs.beta * np.sqrt(rng.uniform(0, 1, s.shape[0]))
        G[s] = mag * np.exp(2j * np.pi * rng.uniform(0, 1, s.shape[0]))
        edge = s == M // 2
        G[s[edge]] = np.abs(G[s[edge]]) * rng.choice([-1, 1], edge.sum())
        return np.fft.irfft(G, n=M)

    def residual(h):
        return np.max(np.maximum(np.abs(np.fft.rfft(h)[s]) - fs.beta, 0))

    return SetModel("stopband", lambda g: pj.project_stopband(g, fs), sample, residual, scale=0.3)


def nyquist_model(L=3):
    c = pj.NyquistConstraint(L, N)
    center = (N - 1) // 2
    zeros = [n for n in range(N) if (n - center) % L == 0 and n != center]

    def sample(rng):
        h = rng.standard_normal(M)
        h[zeros] = 0.0
        h[center] = 1.0 / L
        return h

    def residual(h):
        return max(np.max(np.abs(h[zeros])), abs(h[center] - 1.0 / L))

    return SetModel(f"nyquist(L={L})", lambda g: pj.project_nyquist(g, c, N), sample, residual)


def box_model():
    """Soft-linear constraint with identity rows (input s = [1]); the sweep is then exact."""
    b1 = np.linspace(-0.5, 0.2, N)
    b2 = b1 + np.linspace(0.1, 1.0, N)
    c = pj.SoftLinearConstraint(np.array([1.0]), b1, b2, N)

    def sample(rng):
        h = rng.standard_normal(M)
        h[:N] = rng.uniform(b1, b2)
        return h

    def residual(h):
        y = convolution_matrix(np.array([1.0]), N, mode="full") @ h[:N]
        return max(np.max(np.maximum(b1 - y, 0)), np.max(np.maximum(y - b2, 0)))

    return SetModel("soft_linear(box)", lambda g: pj.project_soft_linear(g, c), sample, residual)


def energy_model(seed=7):
    r = np.random.default_rng(seed)
    s = r.standard_normal(4)
    S = convolution_matrix(s, N, mode="full")
    d = r.standard_normal(S.shape[0])
    center, *_ = np.linalg.lstsq(S, d, rcond=None)
    min_res = np.linalg.norm(S @ center - d)
    sigma = min_res + 0.5
    c = pj.EnergyConstraint(s, d, sigma, N)
    radius2 = sigma**2 - min_res**2

    def sample(rng):
        h = rng.standard_normal(M)
        v = rng.standard_normal(N)
        t = np.sqrt(radius2) / np.linalg.norm(S @ v) * rng.uniform(0, 1) ** (1 / N)
        h[:N] = center + t * v
        return h

    def residual(h):
        return max(0.0, np.linalg.norm(S @ h[:N] - d) - sigma)

    return SetModel("output_energy", lambda g: pj.project_output_energy(g, c), sample, residual, scale=1.0)


def all_models():
    return [
        symmetry_model(),
        support_model(),
        passband_model(),
        stopband_model(),
        nyquist_model(2),
        nyquist_model(3),
        box_model(),
        energy_model(),
    ]


def members_near(model, anchor, rng, count):
    far = [model.sample(rng) for _ in range(count // 2)]
    near = []
    for _ in range(count - len(far)):
        y = model.sample(rng)
        t = 10 ** rng.uniform(-4, 0)
        near.append(anchor + t * (y - anchor))
    return np.array(far + near)
