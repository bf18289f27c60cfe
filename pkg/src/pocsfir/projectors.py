"""Constraint sets for linear-phase FIR design and their projectors.

Every projector takes a real coefficient vector ``g`` of length M (the
candidate impulse response, support nominally ``0..N-1``) and returns a new
vector; inputs are never modified in place.

Frequency-domain projectors decide on the half spectrum and let the real
inverse transform supply the mirrored bins, which keeps the output real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve, convolution_matrix

from .errors import (
    InfeasibleConstraintError,
    InvalidArgumentError,
    InvalidSpecError,
    NumericalError,
)
from .spectral import build_grid, half_forward, half_inverse


def _as_vector(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 1:
        raise InvalidArgumentError(f"expected a 1-D coefficient vector, got shape {g.shape}")
    return g


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass specification: odd length ``N``, ripples and band edges (radians)."""

    N: int
    alpha: float
    beta: float
    omega_p: float
    omega_s: float
    M: int = 1024

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1 or self.N % 2 == 0:
            raise InvalidSpecError(f"N must be an odd positive integer, got {self.N}", field="N")
        if not 0.0 < self.omega_p < self.omega_s < np.pi:
            raise InvalidSpecError(
                "band edges must satisfy 0 < omega_p < omega_s < pi, "
                f"got omega_p={self.omega_p}, omega_s={self.omega_s}",
                field="omega_p" if self.omega_p <= 0 else "omega_s",
            )
        if not 0.0 < self.alpha < 1.0:
            raise InvalidSpecError(f"alpha must lie in (0, 1), got {self.alpha}", field="alpha")
        if not 0.0 < self.beta < 1.0:
            raise InvalidSpecError(f"beta must lie in (0, 1), got {self.beta}", field="beta")
        if int(self.M) != self.M or self.M < 2 * self.N:
            raise InvalidSpecError(f"M must be an integer >= 2N = {2 * self.N}, got {self.M}", field="M")

    @property
    def center(self) -> int:
        return (self.N - 1) // 2


# ---------------------------------------------------------------------------
# C1: symmetry (linear phase) and C7: support
# ---------------------------------------------------------------------------


def project_symmetry(g, N: int) -> np.ndarray:
    """Nearest vector with ``h(n) = h(N-1-n)`` for ``n < N`` and zero tail."""
    g = _as_vector(g)
    if N > g.shape[0]:
        raise InvalidArgumentError(f"N={N} exceeds vector length {g.shape[0]}")
    h = np.zeros_like(g)
    head = g[:N]
    h[:N] = 0.5 * (head + head[::-1])
    return h


def project_support(g, N: int) -> np.ndarray:
    """Keep entries ``0..N-1`` and zero the rest.

    The set as written also asks for ``h(N-1) != 0``. That condition is open
    and has no nearest point, so it is not enforced here.
    """
    g = _as_vector(g)
    if N > g.shape[0]:
        raise InvalidArgumentError(f"N={N} exceeds vector length {g.shape[0]}")
    h = np.zeros_like(g)
    h[:N] = g[:N]
    return h


# ---------------------------------------------------------------------------
# C2 / C3: passband and stopband
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _passband_phasor(spec: FilterSpec) -> np.ndarray:
    grid = build_grid(spec)
    w = 2.0 * np.pi * grid.passband_half / spec.M
    return np.exp(-1j * w * (spec.N - 1) / 2.0)


def project_passband(g, spec: FilterSpec) -> np.ndarray:
    """Projection onto the linear-phase passband set.

    At each passband bin the sample is projected onto the line of phase
    ``-w (N-1)/2``; the signed coordinate along that line is then clamped
    to ``[1 - alpha, 1 + alpha]``. Other bins are left alone.
    """
    g = _as_vector(g)
    if g.shape[0] != spec.M:
        raise InvalidArgumentError(f"expected length {spec.M}, got {g.shape[0]}")
    idx = build_grid(spec).passband_half
    u = _passband_phasor(spec)
    G = half_forward(g)
    coord = np.real(G[idx] * np.conj(u))
    G[idx] = np.clip(coord, 1.0 - spec.alpha, 1.0 + spec.alpha) * u
    return half_inverse(G, spec.M)


def project_stopband(g, spec: FilterSpec) -> np.ndarray:
    """Radially shrink stopband samples with ``|G| > beta`` onto the circle of radius beta."""
    g = _as_vector(g)
    if g.shape[0] != spec.M:
        raise InvalidArgumentError(f"expected length {spec.M}, got {g.shape[0]}")
    idx = build_grid(spec).stopband_half
    G = half_forward(g)
    Gs = G[idx]
    mag = np.abs(Gs)
    over = mag > spec.beta
    Gs[over] *= spec.beta / mag[over]
    G[idx] = Gs
    return half_inverse(G, spec.M)


def passband_coordinates(h, spec: FilterSpec) -> np.ndarray:
    """Complex passband samples rotated by the linear phase.

    For a member of C2 these are real and lie in ``[1-alpha, 1+alpha]``.
    """
    idx = build_grid(spec).passband_half
    return half_forward(_as_vector(h))[idx] * np.conj(_passband_phasor(spec))


def band_residuals(h, spec: FilterSpec) -> dict:
    """Worst-case amplitude violations on the grid (0 when the bounds hold)."""
    grid = build_grid(spec)
    A = np.abs(np.fft.rfft(_as_vector(h), n=spec.M))
    Ap = A[grid.passband_half]
    As = A[grid.stopband_half]
    return {
        "passband_max": float(Ap.max()),
        "passband_min": float(Ap.min()),
        "stopband_max": float(As.max()),
        "passband_excess": float(max(0.0, Ap.max() - (1 + spec.alpha), (1 - spec.alpha) - Ap.min())),
        "stopband_excess": float(max(0.0, As.max() - spec.beta)),
    }


# ---------------------------------------------------------------------------
# C4: soft linear (per-sample output bounds)
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class SoftLinearConstraint:
    """Bounds ``b1(n) <= (s * h)(n) <= b2(n)`` on the filter output for input ``s``.

    Rows whose bounds are both infinite are unconstrained and skipped.
    """

    s: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    N: int
    rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.s = _as_vector(self.s)
        self.b1 = _as_vector(self.b1)
        self.b2 = _as_vector(self.b2)
        n_out = self.N + self.s.shape[0] - 1
        if self.b1.shape[0] != n_out or self.b2.shape[0] != n_out:
            raise InvalidArgumentError(
                f"bounds must have the convolution length N + L - 1 = {n_out}, "
                f"got {self.b1.shape[0]} and {self.b2.shape[0]}"
            )
        if np.any(self.b1 > self.b2):
            bad = int(np.flatnonzero(self.b1 > self.b2)[0])
            raise InvalidArgumentError(f"b1 > b2 at row {bad}")
        self.rows = convolution_matrix(self.s, self.N, mode="full")
        self._norm2 = np.einsum("ij,ij->i", self.rows, self.rows)
        self._active = np.flatnonzero(np.isfinite(self.b1) | np.isfinite(self.b2))

    @classmethod
    def step_response(cls, N: int, length: int, bounds) -> "SoftLinearConstraint":
        """Step input of ``length`` samples with ``bounds`` given as ``(first, last, lo, hi)``.

        Output samples ``first..last`` (inclusive) are bounded; all others are free.
        """
        n_out = N + length - 1
        b1 = np.full(n_out, -np.inf)
        b2 = np.full(n_out, np.inf)
        for first, last, lo, hi in bounds:
            if not 0 <= first <= last < n_out:
                raise InvalidArgumentError(f"bound range {first}..{last} outside 0..{n_out - 1}")
            b1[first:last + 1] = lo
            b2[first:last + 1] = hi
        return cls(np.ones(length), b1, b2, N)

    def output(self, h) -> np.ndarray:
        return self.rows @ _as_vector(h)[: self.N]


def project_soft_linear(g, c: SoftLinearConstraint) -> np.ndarray:
    """One ascending cyclic sweep of slab projections over the output rows.

    Only entries ``0..N-1`` are touched; the rows do not see the tail.
    """
    h = _as_vector(g).copy()
    if h.shape[0] < c.N:
        raise InvalidArgumentError(f"vector length {h.shape[0]} shorter than N={c.N}")
    x = h[: c.N]
    rows, b1, b2, norm2 = c.rows, c.b1, c.b2, c._norm2
    for n in c._active:
        if norm2[n] == 0.0:
            if b1[n] > 0.0 or b2[n] < 0.0:
                raise InfeasibleConstraintError(f"row {n} is zero but 0 is outside [{b1[n]}, {b2[n]}]")
            continue
        v = rows[n] @ x
        if v < b1[n]:
            x += ((b1[n] - v) / norm2[n]) * rows[n]
        elif v > b2[n]:
            x += ((b2[n] - v) / norm2[n]) * rows[n]
    return h


# ---------------------------------------------------------------------------
# C5: output energy ellipsoid
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class EnergyConstraint:
    """``||s * h - d|| <= sigma`` for an input ``s`` and desired output ``d``."""

    s: np.ndarray
    d: np.ndarray
    sigma: float
    N: int
    S: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.s = _as_vector(self.s)
        self.d = _as_vector(self.d)
        if not self.sigma > 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")
        n_out = self.N + self.s.shape[0] - 1
        if self.d.shape[0] != n_out:
            raise InvalidArgumentError(f"d must have length N + L - 1 = {n_out}, got {self.d.shape[0]}")
        self.S = convolution_matrix(self.s, self.N, mode="full")
        self._StS = self.S.T @ self.S
        self._Std = self.S.T @ self.d

    def residual(self, h) -> float:
        return float(np.linalg.norm(self.S @ _as_vector(h)[: self.N] - self.d))


def energy_multiplier(x, c: EnergyConstraint, newton_steps: int = 50, max_bisect: int = 400):
    """Lagrange multiplier and projected taps for the energy constraint.

    Solves ``||S h(lam) - d|| = sigma`` with
    ``h(lam) = (I + lam S^T S)^{-1} (x + lam S^T d)``. The root of
    ``f(lam) = ||S h(lam) - d||^2 - sigma^2`` is bracketed by doubling, then
    found by Newton-Raphson from ``lam = 0``; iterates that leave the bracket
    are replaced by bisection, and after ``newton_steps`` Newton iterations
    the remaining work is plain bisection.

    Parameters
    ----------
    x : ndarray
        The first N taps of the vector being projected; must lie outside
        the ellipsoid.
    c : EnergyConstraint

    Returns
    -------
    lam : float
    h : ndarray
        The projected taps, length N.
    """
    S, d, sigma = c.S, c.d, c.sigma
    eye = np.eye(c.N)

    def evaluate(lam):
        factor = cho_factor(eye + lam * c._StS)
        h = cho_solve(factor, x + lam * c._Std)
        r = S @ h - d
        dh = cho_solve(factor, S.T @ r)
        fprime = -2.0 * float((S @ dh) @ r)
        return float(r @ r) - sigma**2, fprime, h, float(np.linalg.norm(r))

    def done(norm_r, lam, step):
        return abs(norm_r - sigma) <= 1e-13 * max(sigma, 1.0) or abs(step) <= 1e-15 * max(lam, 1.0)

    f0, fp0, h0, norm0 = evaluate(0.0)
    if norm0 <= sigma:
        return 0.0, h0

    lo, hi = 0.0, 1.0
    doublings = 0
    while True:
        f_hi, _, h_hi, norm_hi = evaluate(hi)
        if f_hi <= 0.0:
            break
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise InfeasibleConstraintError(
                f"sigma={sigma} is below the smallest attainable residual (~{norm_hi:.6g})"
            )
    if f_hi == 0.0:
        return hi, h_hi

    lam, f, fp, h, norm_r = 0.0, f0, fp0, h0, norm0
    if lo > 0.0:
        lam = lo
        f, fp, h, norm_r = evaluate(lam)
    for _ in range(newton_steps):
        step = -f / fp if fp != 0.0 else np.inf
        cand = lam + step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
            step = cand - lam
        lam = cand
        f, fp, h, norm_r = evaluate(lam)
        if f > 0.0:
            lo = lam
        else:
            hi = lam
        if done(norm_r, lam, step):
            return lam, h

    for _ in range(max_bisect):
        lam = 0.5 * (lo + hi)
        f, fp, h, norm_r = evaluate(lam)
        if f > 0.0:
            lo = lam
        else:
            hi = lam
        if done(norm_r, lam, hi - lo):
            return lam, h

    raise NumericalError(
        "energy multiplier search did not converge",
        diagnostics={"lambda": lam, "bracket": (lo, hi), "residual": norm_r, "sigma": sigma},
    )


def project_output_energy(g, c: EnergyConstraint) -> np.ndarray:
    """Projection onto the output-energy ellipsoid; entries beyond N are untouched."""
    g = _as_vector(g)
    if g.shape[0] < c.N:
        raise InvalidArgumentError(f"vector length {g.shape[0]} shorter than N={c.N}")
    x = g[: c.N]
    if np.linalg.norm(c.S @ x - c.d) <= c.sigma:
        return g.copy()
    _, hx = energy_multiplier(x, c)
    h = g.copy()
    h[: c.N] = hx
    return h


# ---------------------------------------------------------------------------
# C6: magnitude / phase region at chosen frequencies (non-convex)
# ---------------------------------------------------------------------------


def _wrap(angle):
    return np.angle(np.exp(1j * angle))


def region_masks(x, a, delta, alpha_phase, epsilon) -> np.ndarray:
    """Boolean masks (shape ``(9, ...)``) for regions I..IX of the annular sector.

    Regions I-III have the phase inside the wedge, IV-VI above it and VII-IX
    below it; within each group the (radial or ray) coordinate is below,
    inside or above ``[a - delta, a + delta]``. Boundaries go to the
    lower-numbered region, so the masks are disjoint and cover the plane.
    """
    x = np.asarray(x, dtype=complex)
    lo, hi = a - delta, a + delta
    dev = _wrap(np.angle(x) - alpha_phase)
    r = np.abs(x)
    inside = np.abs(dev) <= epsilon
    above = (dev > epsilon) & ~inside
    below = ~inside & ~above
    rho_up = r * np.cos(dev - epsilon)
    rho_dn = r * np.cos(-epsilon - dev)

    def split(coord):
        return coord <= lo, (coord > lo) & (coord <= hi), coord > hi

    masks = []
    for group, coord in ((inside, r), (above, rho_up), (below, rho_dn)):
        masks.extend(group & m for m in split(coord))
    return np.stack(masks)


def classify_region(x, a, delta, alpha_phase, epsilon) -> np.ndarray:
    """Region number 1..9 of each point."""
    return np.argmax(region_masks(x, a, delta, alpha_phase, epsilon), axis=0) + 1


def project_annular_sector(x, a, delta, alpha_phase, epsilon) -> np.ndarray:
    """Nearest point of ``{z : |z| in [a-d, a+d], angle(z) in [alpha-eps, alpha+eps]}``."""
    x = np.asarray(x, dtype=complex)
    a = np.broadcast_to(np.asarray(a, dtype=float), x.shape)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), x.shape)
    alpha_phase = np.broadcast_to(np.asarray(alpha_phase, dtype=float), x.shape)
    epsilon = np.broadcast_to(np.asarray(epsilon, dtype=float), x.shape)
    lo, hi = a - delta, a + delta
    r = np.abs(x)
    theta = np.angle(x)
    up = np.exp(1j * (alpha_phase + epsilon))
    dn = np.exp(1j * (alpha_phase - epsilon))
    rho_up = r * np.cos(theta - alpha_phase - epsilon)
    rho_dn = r * np.cos(alpha_phase - epsilon - theta)
    candidates = [
        lo * np.exp(1j * theta),
        x,
        hi * np.exp(1j * theta),
        lo * up,
        rho_up * up,
        hi * up,
        lo * dn,
        rho_dn * dn,
        hi * dn,
    ]
    region = classify_region(x, a, delta, alpha_phase, epsilon)
    return np.choose(region - 1, candidates)


@dataclass(eq=False)
class MagPhaseConstraint:
    """Magnitude and phase windows at a handful of frequencies.

    At each ``omega[i]`` (snapped to the nearest DFT bin) the response must
    satisfy ``|H| in [a - delta, a + delta]`` and
    ``angle(H) in [alpha_phase - epsilon, alpha_phase + epsilon]``.
    """

    omega: np.ndarray
    a: np.ndarray
    delta: np.ndarray
    alpha_phase: np.ndarray
    epsilon: np.ndarray

    def __post_init__(self):
        arrays = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=float))
              for v in (self.omega, self.a, self.delta, self.alpha_phase, self.epsilon))
        )
        self.omega, self.a, self.delta, self.alpha_phase, self.epsilon = (np.array(v) for v in arrays)
        if np.any(self.delta <= 0):
            raise InvalidArgumentError("magnitude tolerance delta must be positive")
        if np.any(self.a - self.delta < 0):
            raise InvalidArgumentError("a - delta must be >= 0 (annulus may not cross the origin)")
        if np.any((self.epsilon <= 0) | (self.epsilon >= np.pi / 2)):
            raise InvalidArgumentError("phase tolerance epsilon must lie in (0, pi/2)")
        if np.any((self.omega <= 0) | (self.omega >= np.pi)):
            raise InvalidArgumentError("constrained frequencies must lie strictly inside (0, pi)")

    def bins(self, M: int) -> np.ndarray:
        k = np.rint(self.omega * M / (2 * np.pi)).astype(int)
        if np.any((k <= 0) | (2 * k >= M)):
            raise InvalidArgumentError(f"a constrained frequency maps to bin 0 or M/2 for M={M}")
        if np.unique(k).shape[0] != k.shape[0]:
            raise InvalidArgumentError(f"two constrained frequencies share a bin for M={M}")
        return k


def project_mag_phase(g, c: MagPhaseConstraint) -> np.ndarray:
    """Per-bin nearest point of the magnitude/phase region (not a convex projection)."""
    g = _as_vector(g)
    M = g.shape[0]
    k = c.bins(M)
    G = half_forward(g)
    G[k] = project_annular_sector(G[k], c.a, c.delta, c.alpha_phase, c.epsilon)
    return half_inverse(G, M)


# ---------------------------------------------------------------------------
# Nyquist (L-th band) constraint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NyquistConstraint:
    """Center tap ``1/L`` and zeros at every L-th tap away from the center."""

    L: int
    N: int

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise InvalidArgumentError(f"decimation factor L must be an integer >= 2, got {self.L}")
        if self.N % 2 == 0:
            raise InvalidArgumentError(f"Nyquist center (N-1)/2 is not an integer for N={self.N}")

    @property
    def center(self) -> int:
        return (self.N - 1) // 2

    def zero_taps(self) -> np.ndarray:
        c = self.center
        n = np.arange(self.N)
        return n[((n - c) % self.L == 0) & (n != c)]


def project_nyquist(g, c: NyquistConstraint, N: int | None = None) -> np.ndarray:
    """Set the center tap to 1/L and zero taps at offsets that are multiples of L.

    Only entries ``0..N-1`` are affected; everything else is copied.
    """
    g = _as_vector(g)
    N = c.N if N is None else N
    if N % 2 == 0:
        raise InvalidArgumentError(f"Nyquist center (N-1)/2 is not an integer for N={N}")
    if N > g.shape[0]:
        raise InvalidArgumentError(f"N={N} exceeds vector length {g.shape[0]}")
    if N != c.N:
        c = NyquistConstraint(c.L, N)
    h = g.copy()
    h[c.zero_taps()] = 0.0
    h[c.center] = 1.0 / c.L
    return h


# ---------------------------------------------------------------------------
# Uniform wrappers used by the solver
# ---------------------------------------------------------------------------


class Constraint:
    """A constraint set paired with its projector."""

    name = "constraint"
    convex = True

    def project(self, g) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Symmetry(Constraint):
    name = "symmetry"

    def __init__(self, N):
        self.N = N

    def project(self, g):
        return project_symmetry(g, self.N)


class Support(Constraint):
    name = "support"

    def __init__(self, N):
        self.N = N

    def project(self, g):
        return project_support(g, self.N)


class Passband(Constraint):
    name = "passband"

    def __init__(self, spec: FilterSpec):
        self.spec = spec

    def project(self, g):
        return project_passband(g, self.spec)


class Stopband(Constraint):
    name = "stopband"

    def __init__(self, spec: FilterSpec):
        self.spec = spec

    def project(self, g):
        return project_stopband(g, self.spec)


class SoftLinear(Constraint):
    name = "soft_linear"

    def __init__(self, c: SoftLinearConstraint):
        self.c = c

    def project(self, g):
        return project_soft_linear(g, self.c)


class OutputEnergy(Constraint):
    name = "output_energy"

    def __init__(self, c: EnergyConstraint):
        self.c = c

    def project(self, g):
        return project_output_energy(g, self.c)


class MagPhase(Constraint):
    name = "mag_phase"
    convex = False

    def __init__(self, c: MagPhaseConstraint):
        self.c = c

    def project(self, g):
        return project_mag_phase(g, self.c)


class Nyquist(Constraint):
    name = "nyquist"

    def __init__(self, c: NyquistConstraint):
        self.c = c

    def project(self, g):
        return project_nyquist(g, self.c)


def as_constraint(obj) -> Constraint:
    """Wrap a raw constraint description in its projector object."""
    if isinstance(obj, Constraint):
        return obj
    wrappers = {
        SoftLinearConstraint: SoftLinear,
        EnergyConstraint: OutputEnergy,
        MagPhaseConstraint: MagPhase,
        NyquistConstraint: Nyquist,
    }
    for kind, wrapper in wrappers.items():
        if isinstance(obj, kind):
            return wrapper(obj)
    raise InvalidArgumentError(f"not a constraint: {obj!r}")
