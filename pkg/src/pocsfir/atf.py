"""Max-error projection design on an amplitude-response grid.

The design variable is the cosine-series vector ``a`` of an odd-length
symmetric filter, ``A(f) = sum_n a(n) cos(2 pi n f)`` with ``f`` in cycles
per sample. Each grid point ``f_k`` defines a slab
``|D(f_k) - A(f_k)| <= tol(f_k)``; every iteration projects onto the slab
with the largest error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrequencyError, InvalidArgumentError
from .solver import ConvergenceReport

log = logging.getLogger(__name__)

# projections land this fraction inside the slab so that rounding cannot
# leave the just-projected point a hair outside it
_INWARD = 1e-12


@dataclass(eq=False)
class AtfProblem:
    """Grid, desired response, tolerances and forced-zero indices.

    Attributes
    ----------
    N : int
        Odd filter length; there are ``(N - 1)/2 + 1`` cosine coefficients.
    freqs : ndarray
        Normalized grid frequencies ``f_k`` in ``[0, 0.5]``.
    desired, tolerance : ndarray
        ``D(f_k)`` and the allowed error ``tol(f_k) > 0``.
    zero_set : frozenset
        Coefficient indices held at zero.
    basis : ndarray
        ``basis[n, k] = cos(2 pi n f_k)``, shape ``(dim, K)``.
    """

    N: int
    freqs: np.ndarray
    desired: np.ndarray
    tolerance: np.ndarray
    zero_set: frozenset = frozenset()
    basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 1 or self.N % 2 == 0:
            raise InvalidArgumentError(f"N must be odd and positive, got {self.N}")
        self.freqs = np.asarray(self.freqs, dtype=float)
        K = self.freqs.shape[0]
        self.desired = np.broadcast_to(np.asarray(self.desired, dtype=float), (K,)).copy()
        self.tolerance = np.broadcast_to(np.asarray(self.tolerance, dtype=float), (K,)).copy()
        if np.any(self.tolerance <= 0):
            raise InvalidArgumentError("tolerances must be positive at every grid point")
        self.zero_set = frozenset(int(i) for i in self.zero_set)
        if any(not 0 <= i < self.dim for i in self.zero_set):
            raise InvalidArgumentError(f"zero_set indices must lie in 0..{self.dim - 1}")
        n = np.arange(self.dim)[:, None]
        self.basis = np.cos(2.0 * np.pi * n * self.freqs[None, :])
        self._free = np.ones(self.dim, dtype=bool)
        self._free[list(self.zero_set)] = False
        self._masked = self.basis * self._free[:, None]

    @property
    def dim(self) -> int:
        return (self.N - 1) // 2 + 1

    @property
    def K(self) -> int:
        return self.freqs.shape[0]

    @property
    def free(self) -> np.ndarray:
        return self._free.copy()


def lowpass_problem(N, K, f_pass, f_stop, tol_pass, tol_stop, zero_set=()):
    """Low-pass grid: ``K`` points split between ``[0, f_pass]`` and ``[f_stop, 0.5]``.

    Points are shared out in proportion to the band widths and include the
    band edges. ``D = 1`` in the passband and ``0`` in the stopband.
    """
    if not 0 < f_pass < f_stop < 0.5:
        raise InvalidArgumentError(f"need 0 < f_pass < f_stop < 0.5, got {f_pass}, {f_stop}")
    if K < 4:
        raise InvalidArgumentError(f"need at least 4 grid points, got {K}")
    wp, ws = f_pass, 0.5 - f_stop
    Kp = min(K - 2, max(2, int(round(K * wp / (wp + ws)))))
    Ks = K - Kp
    freqs = np.concatenate([np.linspace(0.0, f_pass, Kp), np.linspace(f_stop, 0.5, Ks)])
    desired = np.concatenate([np.ones(Kp), np.zeros(Ks)])
    tolerance = np.concatenate([np.full(Kp, tol_pass), np.full(Ks, tol_stop)])
    return AtfProblem(N, freqs, desired, tolerance, frozenset(zero_set))


def a_to_h(a, N: int) -> np.ndarray:
    """Symmetric taps from cosine coefficients: ``h(c) = a(0)``, ``h(c -/+ n) = a(n)/2``."""
    a = np.asarray(a, dtype=float)
    c = (N - 1) // 2
    h = np.empty(N)
    h[c] = a[0]
    h[c - np.arange(1, c + 1)] = 0.5 * a[1:]
    h[c + np.arange(1, c + 1)] = 0.5 * a[1:]
    return h


def h_to_a(h, N: int) -> np.ndarray:
    h = np.asarray(h, dtype=float)[:N]
    c = (N - 1) // 2
    a = np.empty(c + 1)
    a[0] = h[c]
    a[1:] = 2.0 * h[c - np.arange(1, c + 1)]
    return a


def _check_a(a, problem):
    a = np.asarray(a, dtype=float)
    if a.shape != (problem.dim,):
        raise InvalidArgumentError(f"expected {problem.dim} coefficients, got shape {a.shape}")
    return a


def atf_amplitude(a, problem: AtfProblem, k: int) -> float:
    """Amplitude response at grid point ``k``."""
    a = _check_a(a, problem)
    if not 0 <= k < problem.K:
        raise IndexError(f"grid index {k} out of range 0..{problem.K - 1}")
    return float(problem._masked[:, k] @ a)


def atf_errors(a, problem: AtfProblem) -> np.ndarray:
    """Signed error ``D(f_k) - A(f_k)`` at every grid point."""
    return problem.desired - problem._masked.T @ _check_a(a, problem)


def atf_worst_violation(a, problem: AtfProblem):
    """``(k, e_k)`` for the violated point with the largest ``|e|``, or ``None``."""
    e = atf_errors(a, problem)
    mag = np.abs(e)
    violated = mag > problem.tolerance
    if not violated.any():
        return None
    k = int(np.argmax(np.where(violated, mag, -np.inf)))
    return k, float(e[k])


def atf_project(a, problem: AtfProblem, k: int) -> np.ndarray:
    """Project onto the slab of grid point ``k`` along its basis column.

    Coefficients in the zero set are excluded from the update and the
    normalizer. Points already inside the slab are returned unchanged.
    """
    a = _check_a(a, problem)
    psi = problem._masked[:, k]
    norm2 = float(psi @ psi)
    if norm2 == 0.0:
        raise DegenerateFrequencyError(
            f"all free basis functions vanish at f={problem.freqs[k]:.6g} (grid index {k})"
        )
    e = float(problem.desired[k] - psi @ a)
    lam = float(problem.tolerance[k])
    if abs(e) <= lam:
        return a.copy()
    target = np.sign(e) * lam * (1.0 - _INWARD)
    return a + ((e - target) / norm2) * psi


def least_squares_start(problem: AtfProblem) -> np.ndarray:
    a = np.zeros(problem.dim)
    free = problem._free
    sol, *_ = np.linalg.lstsq(problem.basis[free].T, problem.desired, rcond=None)
    a[free] = sol
    return a


def atf_solve(problem: AtfProblem, a0=None, max_iter: int = 100_000):
    """Project onto the worst-violated slab until every grid error is within tolerance.

    ``a0`` defaults to the least-squares fit of ``D`` on the free basis
    functions. Zero-set entries of ``a0`` are cleared before starting.

    Returns
    -------
    a : ndarray
    report : ConvergenceReport
        ``iterations`` counts projections; ``per_set_distance`` holds the
        worst excess ``|e| - tol`` before each projection;
        ``terminated_by`` is ``"feasible"`` or ``"max-iter"``.
    """
    if int(max_iter) != max_iter or max_iter <= 0:
        raise InvalidArgumentError(f"max_iter must be a positive integer, got {max_iter}")
    a = least_squares_start(problem) if a0 is None else _check_a(a0, problem).copy()
    a[~problem._free] = 0.0

    excess = []
    step = 0.0
    terminated_by = "max-iter"
    for _ in range(int(max_iter)):
        worst = atf_worst_violation(a, problem)
        if worst is None:
            terminated_by = "feasible"
            break
        k, e = worst
        excess.append(abs(e) - problem.tolerance[k])
        new = atf_project(a, problem, k)
        step = float(np.linalg.norm(new - a))
        a = new
    else:
        if atf_worst_violation(a, problem) is None:
            terminated_by = "feasible"

    report = ConvergenceReport(
        iterations=len(excess),
        final_step=step,
        terminated_by=terminated_by,
        per_set_distance=np.array(excess, dtype=float).reshape(-1, 1),
        set_names=("max_excess",),
    )
    log.info("atf run: %d projections, %s", report.iterations, terminated_by)
    return a, report
