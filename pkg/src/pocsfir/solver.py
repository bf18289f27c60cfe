"""Fixed-point iteration over a chain of (relaxed) projectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .projectors import (
    Constraint,
    FilterSpec,
    Passband,
    Stopband,
    Symmetry,
    as_constraint,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200_000
SDE_WINDOW = 50
SDE_RTOL = 1e-9


@dataclass
class ProjectorChain:
    """Projectors in application order (first entry is applied first).

    Each entry is ``(constraint, mu)`` with relaxation ``0 < mu < 2``; the
    relaxed operator is ``x + mu * (P x - x)``.
    """

    entries: list

    def __post_init__(self):
        checked = []
        for constraint, mu in self.entries:
            mu = float(mu)
            if not 0.0 < mu < 2.0:
                raise InvalidArgumentError(f"relaxation must lie in (0, 2), got {mu}")
            checked.append((as_constraint(constraint), mu))
        self.entries = checked

    @property
    def nonconvex_present(self) -> bool:
        return any(not c.convex for c, _ in self.entries)

    @property
    def constraints(self) -> list:
        return [c for c, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def apply(self, x: np.ndarray, distances: Optional[list] = None) -> np.ndarray:
        """One sweep ``T_m ... T_1 x``; optionally collect ``||P_i y - y||`` per stage."""
        for constraint, mu in self.entries:
            p = constraint.project(x)
            if distances is not None:
                distances.append(float(np.linalg.norm(p - x)))
            x = p if mu == 1.0 else x + mu * (p - x)
        return x


@dataclass
class ConvergenceReport:
    """Outcome of an iterative design run.

    ``per_set_distance[k, i]`` is the distance moved by projector ``i`` during
    iteration ``k + 1``, i.e. the distance from its input to set ``i``.
    ``summed_distance_error`` is only tracked for chains with a non-convex set.
    """

    iterations: int
    final_step: float
    terminated_by: str
    per_set_distance: np.ndarray = field(repr=False)
    summed_distance_error: Optional[np.ndarray] = field(default=None, repr=False)
    set_names: tuple = ()

    @property
    def converged(self) -> bool:
        return self.terminated_by in ("step-tolerance", "feasible")

    def as_dict(self) -> dict:
        out = {
            "iterations": self.iterations,
            "final_step": self.final_step,
            "terminated_by": self.terminated_by,
            "converged": self.converged,
        }
        if self.per_set_distance.size:
            out["final_set_distance"] = dict(
                zip(self.set_names, (float(v) for v in self.per_set_distance[-1]))
            )
        if self.summed_distance_error is not None and self.summed_distance_error.size:
            out["final_summed_distance_error"] = float(self.summed_distance_error[-1])
        return out


def distance_to_set(h, constraint) -> float:
    """Euclidean distance ``||h - P h||`` using the constraint's projector."""
    h = np.asarray(h, dtype=float)
    return float(np.linalg.norm(h - as_constraint(constraint).project(h)))


def summed_distance_error(h, chain: ProjectorChain) -> float:
    return float(sum(distance_to_set(h, c) ** 2 for c in chain.constraints))


def make_chain(spec: FilterSpec, extras: Sequence = (), relaxation=None) -> ProjectorChain:
    """Standard chain: ``extras`` first, then stopband, passband and symmetry.

    ``relaxation`` is ``None`` (all ones), a single value for every entry, or
    one value per entry in application order.
    """
    constraints = [as_constraint(c) for c in extras]
    constraints += [Stopband(spec), Passband(spec), Symmetry(spec.N)]
    if relaxation is None:
        mus = [1.0] * len(constraints)
    elif np.ndim(relaxation) == 0:
        mus = [float(relaxation)] * len(constraints)
    else:
        mus = [float(m) for m in relaxation]
        if len(mus) != len(constraints):
            raise InvalidArgumentError(
                f"got {len(mus)} relaxation values for {len(constraints)} projectors"
            )
    return ProjectorChain(list(zip(constraints, mus)))


def ideal_lowpass(spec: FilterSpec) -> np.ndarray:
    """Truncated ideal low-pass impulse response, cutoff midway between the band edges."""
    wc = 0.5 * (spec.omega_p + spec.omega_s)
    n = np.arange(spec.N) - spec.center
    h = np.zeros(spec.M)
    h[: spec.N] = wc / np.pi * np.sinc(wc * n / np.pi)
    return h


def run(
    chain: ProjectorChain,
    h0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
    track_sde: Optional[bool] = None,
):
    """Iterate ``h <- T_m ... T_1 h`` until the step norm drops below ``tol``.

    Parameters
    ----------
    chain : ProjectorChain
    h0 : array_like
        Starting vector (length M).
    tol : float
        Stop once ``||h^{k+1} - h^k|| < tol``.
    max_iter : int
        Iteration budget; running out is reported, not raised.
    callback : callable, optional
        Called as ``callback(k, h)`` after every iteration.
    track_sde : bool, optional
        Record the summed distance error each iteration. Defaults to on when
        the chain contains a non-convex set; it also enables the stall exit
        (no relative decrease of ``SDE_RTOL`` over ``SDE_WINDOW`` iterations).

    Returns
    -------
    h : ndarray
    report : ConvergenceReport
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    if int(max_iter) != max_iter or max_iter <= 0:
        raise InvalidArgumentError(f"max_iter must be a positive integer, got {max_iter}")
    if track_sde is None:
        track_sde = chain.nonconvex_present
    h = np.array(h0, dtype=float)
    if h.ndim != 1:
        raise InvalidArgumentError(f"h0 must be a vector, got shape {h.shape}")

    distances = []
    sde = []
    step = np.inf
    terminated_by = "max-iter"
    k = 0
    for k in range(1, int(max_iter) + 1):
        row = []
        new = chain.apply(h, row)
        distances.append(row)
        step = float(np.linalg.norm(new - h))
        h = new
        if callback is not None:
            callback(k, h)
        if step < tol:
            terminated_by = "step-tolerance"
            break
        if track_sde:
            sde.append(summed_distance_error(h, chain))
            if chain.nonconvex_present and len(sde) > SDE_WINDOW:
                past = sde[-SDE_WINDOW - 1]
                if past - sde[-1] < SDE_RTOL * past:
                    terminated_by = "sde-stall"
                    break
    if track_sde and len(sde) < k:
        sde.append(summed_distance_error(h, chain))

    report = ConvergenceReport(
        iterations=k,
        final_step=step,
        terminated_by=terminated_by,
        per_set_distance=np.array(distances, dtype=float).reshape(k, len(chain)),
        summed_distance_error=np.array(sde) if track_sde else None,
        set_names=tuple(c.name for c in chain.constraints),
    )
    log.info("pocs run: %d iterations, final step %.3e, %s", k, step, terminated_by)
    return h, report
