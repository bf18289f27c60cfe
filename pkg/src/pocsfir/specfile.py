"""Design-spec files: an INI dialect with one section per constraint.

Example::

    [filter]
    N = 31
    M = 1024
    alpha = 0.0243
    beta = 0.0243
    omega_p = 0.4pi
    omega_s = 0.5pi

    [step_response]
    length = 32
    bounds =
        1..13, -0.055, 0.055
        18..31, 0.945, 1.055

    [solver]
    method = pocs
    tol = 1e-6

Unknown sections or keys are rejected. Angles may be written as raw
radians or as a multiple of pi (``0.4pi``, ``0.4*pi``, ``pi``).
"""

from __future__ import annotations

import configparser
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, InvalidSpecError
from .projectors import (
    EnergyConstraint,
    FilterSpec,
    MagPhaseConstraint,
    NyquistConstraint,
    SoftLinearConstraint,
)

log = logging.getLogger(__name__)

METHODS = ("pocs", "atf")
INITS = ("zero", "ideal")

_SCHEMA = {
    "filter": {"n", "m", "alpha", "beta", "omega_p", "omega_s"},
    "nyquist": {"l"},
    "step_response": {"length", "bounds"},
    "energy": {"signal", "d", "sigma"},
    "magphase": {"points"},
    "atf": {"k", "zero_set"},
    "solver": {"method", "tol", "max_iter", "mu", "init"},
}

_PI_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class StepResponseSpec:
    length: int
    bounds: tuple  # ((first, last, lo, hi), ...)


@dataclass(frozen=True)
class EnergySpec:
    signal: tuple
    d: tuple
    sigma: float


@dataclass(frozen=True)
class MagPhasePoint:
    omega: float
    a: float
    delta: float
    alpha_phase: float
    epsilon: float


@dataclass(frozen=True)
class DesignSpecFile:
    """Validated contents of a design-spec file with every default filled in."""

    filter: FilterSpec
    method: str = "pocs"
    tol: float = 1e-6
    max_iter: int = 200_000
    mu: tuple = (1.0,)
    init: str = "zero"
    nyquist_L: Optional[int] = None
    step_response: Optional[StepResponseSpec] = None
    energy: Optional[EnergySpec] = None
    magphase: tuple = ()
    atf_K: int = 64
    atf_zero_set: tuple = ()
    defaulted: tuple = field(default=(), compare=False)

    def extra_sections(self) -> list:
        names = []
        if self.nyquist_L is not None:
            names.append("nyquist")
        if self.step_response is not None:
            names.append("step_response")
        if self.energy is not None:
            names.append("energy")
        if self.magphase:
            names.append("magphase")
        return names

    def constraints(self) -> list:
        """Extra constraint sets beyond the basic passband/stopband/symmetry trio."""
        N = self.filter.N
        out = []
        if self.nyquist_L is not None:
            out.append(NyquistConstraint(self.nyquist_L, N))
        if self.step_response is not None:
            out.append(
                SoftLinearConstraint.step_response(N, self.step_response.length, self.step_response.bounds)
            )
        if self.energy is not None:
            out.append(EnergyConstraint(np.array(self.energy.signal), np.array(self.energy.d), self.energy.sigma, N))
        if self.magphase:
            cols = list(zip(*((p.omega, p.a, p.delta, p.alpha_phase, p.epsilon) for p in self.magphase)))
            out.append(MagPhaseConstraint(*(np.array(c) for c in cols)))
        return out


def parse_angle(text: str) -> float:
    """``"0.4pi"`` -> ``0.4 * pi``; plain numbers are radians."""
    m = _PI_RE.match(text)
    if m:
        return (float(m.group(1)) if m.group(1) else 1.0) * np.pi
    return float(text)


def _number(section, key, raw, kind=float):
    try:
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return kind(raw)
    except ValueError:
        raise InvalidSpecError(f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}", field=key) from None


def _floats(section, key, raw):
    parts = [p for p in re.split(r"[,\s]+", raw.strip()) if p]
    if not parts:
        raise InvalidSpecError(f"[{section}] {key}: empty list", field=key)
    return tuple(_number(section, key, p) for p in parts)


def _lines(raw):
    return [ln.strip() for ln in raw.strip().splitlines() if ln.strip()]


def _parse_bounds(raw):
    bounds = []
    for ln in _lines(raw):
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != 3:
            raise InvalidSpecError(
                f"[step_response] bounds: expected 'first..last, lo, hi', got {ln!r}", field="bounds"
            )
        rng, lo, hi = parts
        if ".." in rng:
            first, last = rng.split("..", 1)
        else:
            first = last = rng
        first = _number("step_response", "bounds", first, int)
        last = _number("step_response", "bounds", last, int)
        lo = _number("step_response", "bounds", lo)
        hi = _number("step_response", "bounds", hi)
        if first > last:
            raise InvalidSpecError(f"[step_response] bounds: range {first}..{last} is reversed", field="bounds")
        if lo > hi:
            raise InvalidSpecError(f"[step_response] bounds: lower {lo} exceeds upper {hi}", field="bounds")
        bounds.append((first, last, lo, hi))
    if not bounds:
        raise InvalidSpecError("[step_response] bounds: no bounds given", field="bounds")
    return tuple(bounds)


def _parse_points(raw):
    points = []
    for ln in _lines(raw):
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != 5:
            raise InvalidSpecError(
                f"[magphase] points: expected 'omega, a, delta, alpha_phase, epsilon', got {ln!r}",
                field="points",
            )
        try:
            omega, alpha_phase, epsilon = parse_angle(parts[0]), parse_angle(parts[3]), parse_angle(parts[4])
        except ValueError:
            raise InvalidSpecError(f"[magphase] points: bad angle in {ln!r}", field="points") from None
        a = _number("magphase", "points", parts[1])
        delta = _number("magphase", "points", parts[2])
        points.append(MagPhasePoint(omega, a, delta, alpha_phase, epsilon))
    return tuple(points)


def _read(text: str, source: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        strict=True, interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise InvalidSpecError(f"{source}:{exc.lineno}: expected a [section] header", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise InvalidSpecError(f"{source}:{lineno}: cannot parse {line.strip()!r}", line=lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise InvalidSpecError(f"{source}:{exc.lineno}: {exc.message}", line=exc.lineno) from None
    return cp


def loads(text: str, source: str = "<spec>") -> DesignSpecFile:
    """Parse and validate spec-file text."""
    cp = _read(text, source)
    for section in cp.sections():
        if section not in _SCHEMA:
            raise InvalidSpecError(f"unknown section [{section}]", field=section)
        unknown = set(cp[section]) - _SCHEMA[section]
        if unknown:
            raise InvalidSpecError(f"[{section}] unknown key(s): {', '.join(sorted(unknown))}", field=sorted(unknown)[0])
    if not cp.has_section("filter"):
        raise InvalidSpecError("missing required section [filter]", field="filter")

    defaulted = []
    f = cp["filter"]
    for key in ("n", "alpha", "beta", "omega_p", "omega_s"):
        if key not in f:
            raise InvalidSpecError(f"[filter] missing required key {key!r}", field=key)
    try:
        omega_p = parse_angle(f["omega_p"])
        omega_s = parse_angle(f["omega_s"])
    except ValueError:
        raise InvalidSpecError("[filter] omega_p/omega_s must be radians or a multiple of pi", field="omega_p") from None
    if "m" not in f:
        defaulted.append("filter.M")
    fspec = FilterSpec(
        N=_number("filter", "N", f["n"], int),
        alpha=_number("filter", "alpha", f["alpha"]),
        beta=_number("filter", "beta", f["beta"]),
        omega_p=omega_p,
        omega_s=omega_s,
        M=_number("filter", "M", f.get("m", "1024"), int),
    )

    kwargs = {}
    s = cp["solver"] if cp.has_section("solver") else {}
    for key, default in (("method", "pocs"), ("tol", "1e-6"), ("max_iter", "200000"), ("mu", "1.0"), ("init", "zero")):
        if key not in s:
            defaulted.append(f"solver.{key}")
    kwargs["method"] = s.get("method", "pocs").strip().lower()
    if kwargs["method"] not in METHODS:
        raise InvalidSpecError(f"[solver] method must be one of {METHODS}, got {kwargs['method']!r}", field="method")
    kwargs["init"] = s.get("init", "zero").strip().lower()
    if kwargs["init"] not in INITS:
        raise InvalidSpecError(f"[solver] init must be one of {INITS}, got {kwargs['init']!r}", field="init")
    kwargs["tol"] = _number("solver", "tol", s.get("tol", "1e-6"))
    if not kwargs["tol"] > 0:
        raise InvalidSpecError(f"[solver] tol must be positive, got {kwargs['tol']}", field="tol")
    kwargs["max_iter"] = _number("solver", "max_iter", s.get("max_iter", "200000"), int)
    if kwargs["max_iter"] <= 0:
        raise InvalidSpecError(f"[solver] max_iter must be positive, got {kwargs['max_iter']}", field="max_iter")
    kwargs["mu"] = _floats("solver", "mu", s.get("mu", "1.0"))
    if any(not 0 < m < 2 for m in kwargs["mu"]):
        raise InvalidSpecError(f"[solver] mu values must lie in (0, 2), got {kwargs['mu']}", field="mu")

    if cp.has_section("nyquist"):
        sec = cp["nyquist"]
        if "l" not in sec:
            raise InvalidSpecError("[nyquist] missing required key 'L'", field="L")
        kwargs["nyquist_L"] = _number("nyquist", "L", sec["l"], int)
        if kwargs["nyquist_L"] < 2:
            raise InvalidSpecError(f"[nyquist] L must be an integer >= 2, got {kwargs['nyquist_L']}", field="L")

    if cp.has_section("step_response"):
        sec = cp["step_response"]
        if "bounds" not in sec:
            raise InvalidSpecError("[step_response] missing required key 'bounds'", field="bounds")
        bounds = _parse_bounds(sec["bounds"])
        if "length" in sec:
            length = _number("step_response", "length", sec["length"], int)
        else:
            length = max(b[1] for b in bounds) + 1
            defaulted.append("step_response.length")
        if length < 1:
            raise InvalidSpecError(f"[step_response] length must be positive, got {length}", field="length")
        n_out = fspec.N + length - 1
        if max(b[1] for b in bounds) >= n_out or min(b[0] for b in bounds) < 0:
            raise InvalidSpecError(f"[step_response] bounds must index outputs 0..{n_out - 1}", field="bounds")
        kwargs["step_response"] = StepResponseSpec(length, bounds)

    if cp.has_section("energy"):
        sec = cp["energy"]
        for key in ("signal", "d", "sigma"):
            if key not in sec:
                raise InvalidSpecError(f"[energy] missing required key {key!r}", field=key)
        signal = _floats("energy", "signal", sec["signal"])
        d = _floats("energy", "d", sec["d"])
        sigma = _number("energy", "sigma", sec["sigma"])
        if not sigma > 0:
            raise InvalidSpecError(f"[energy] sigma must be positive, got {sigma}", field="sigma")
        if len(d) != fspec.N + len(signal) - 1:
            raise InvalidSpecError(
                f"[energy] d must have N + len(signal) - 1 = {fspec.N + len(signal) - 1} values, got {len(d)}",
                field="d",
            )
        kwargs["energy"] = EnergySpec(signal, d, sigma)

    if cp.has_section("magphase"):
        sec = cp["magphase"]
        if "points" not in sec:
            raise InvalidSpecError("[magphase] missing required key 'points'", field="points")
        kwargs["magphase"] = _parse_points(sec["points"])

    if cp.has_section("atf"):
        sec = cp["atf"]
        if "k" in sec:
            kwargs["atf_K"] = _number("atf", "K", sec["k"], int)
        if "zero_set" in sec and sec["zero_set"].strip():
            kwargs["atf_zero_set"] = tuple(int(v) for v in _floats("atf", "zero_set", sec["zero_set"]))

    spec = DesignSpecFile(filter=fspec, defaulted=tuple(defaulted), **kwargs)
    _validate(spec)
    for key in defaulted:
        log.info("defaulted %s", key)
    return spec


def _validate(spec: DesignSpecFile):
    n_extra = len(spec.extra_sections())
    if len(spec.mu) not in (1, n_extra + 3):
        raise InvalidSpecError(
            f"[solver] mu: give one value or {n_extra + 3} (one per projector), got {len(spec.mu)}", field="mu"
        )
    if spec.method == "atf":
        if n_extra:
            raise InvalidSpecError(
                "method atf supports only the [filter] and [atf] sections", field="method"
            )
        dim = (spec.filter.N - 1) // 2 + 1
        if any(not 0 <= i < dim for i in spec.atf_zero_set):
            raise InvalidSpecError(f"[atf] zero_set indices must lie in 0..{dim - 1}", field="zero_set")
        if spec.atf_K < 4:
            raise InvalidSpecError(f"[atf] K must be at least 4, got {spec.atf_K}", field="K")
    try:
        spec.constraints()
    except InvalidArgumentError as exc:
        raise InvalidSpecError(str(exc)) from None


def parse_spec(path) -> DesignSpecFile:
    """Read and validate a design-spec file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads(text, source=str(path))


def _fmt(x) -> str:
    return repr(float(x))


def dumps(spec: DesignSpecFile) -> str:
    """Render a spec back to file syntax; ``loads(dumps(s)) == s``."""
    f = spec.filter
    out = [
        "[filter]",
        f"N = {f.N}",
        f"M = {f.M}",
        f"alpha = {_fmt(f.alpha)}",
        f"beta = {_fmt(f.beta)}",
        f"omega_p = {_fmt(f.omega_p)}",
        f"omega_s = {_fmt(f.omega_s)}",
        "",
    ]
    if spec.nyquist_L is not None:
        out += ["[nyquist]", f"L = {spec.nyquist_L}", ""]
    if spec.step_response is not None:
        out += ["[step_response]", f"length = {spec.step_response.length}", "bounds ="]
        out += [f"    {a}..{b}, {_fmt(lo)}, {_fmt(hi)}" for a, b, lo, hi in spec.step_response.bounds]
        out.append("")
    if spec.energy is not None:
        e = spec.energy
        out += [
            "[energy]",
            "signal = " + ", ".join(_fmt(v) for v in e.signal),
            "d = " + ", ".join(_fmt(v) for v in e.d),
            f"sigma = {_fmt(e.sigma)}",
            "",
        ]
    if spec.magphase:
        out += ["[magphase]", "points ="]
        out += [
            "    " + ", ".join(_fmt(v) for v in (p.omega, p.a, p.delta, p.alpha_phase, p.epsilon))
            for p in spec.magphase
        ]
        out.append("")
    if spec.method == "atf" or spec.atf_K != 64 or spec.atf_zero_set:
        out += ["[atf]", f"K = {spec.atf_K}"]
        if spec.atf_zero_set:
            out.append("zero_set = " + ", ".join(str(i) for i in spec.atf_zero_set))
        out.append("")
    out += [
        "[solver]",
        f"method = {spec.method}",
        f"tol = {_fmt(spec.tol)}",
        f"max_iter = {spec.max_iter}",
        "mu = " + ", ".join(_fmt(m) for m in spec.mu),
        f"init = {spec.init}",
        "",
    ]
    return "\n".join(out)


def with_overrides(spec: DesignSpecFile, **changes) -> DesignSpecFile:
    """Copy of ``spec`` with command-line overrides applied (``None`` means keep)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(spec, **changes) if changes else spec
