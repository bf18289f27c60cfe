"""Command-line front end: ``pocsfir design SPECFILE [--out DIR] ...``.

Exit status is 0 when the design converged, 2 when it did not (artifacts
are still written) and 1 for usage or spec errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import atf, solver
from .errors import PocsError
from .projectors import NyquistConstraint, SoftLinearConstraint, band_residuals, project_nyquist
from .specfile import DesignSpecFile, dumps, parse_spec, with_overrides

log = logging.getLogger("pocsfir")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def initial_vector(spec: DesignSpecFile) -> np.ndarray:
    if spec.init == "ideal":
        return solver.ideal_lowpass(spec.filter)
    return np.zeros(spec.filter.M)


def design(spec: DesignSpecFile):
    """Run the design described by ``spec``.

    Returns the N filter taps and the convergence report. With a Nyquist
    section the pattern taps are re-imposed on the final iterate, which
    makes the zeros and the center tap exact. That last projection commutes
    with the symmetry projector, so the result stays symmetric.
    """
    fspec = spec.filter
    if spec.method == "atf":
        problem = atf.lowpass_problem(
            fspec.N,
            spec.atf_K,
            fspec.omega_p / (2 * np.pi),
            fspec.omega_s / (2 * np.pi),
            fspec.alpha,
            fspec.beta,
            zero_set=spec.atf_zero_set,
        )
        a0 = None
        if spec.init == "ideal":
            a0 = atf.h_to_a(solver.ideal_lowpass(fspec), fspec.N)
        a, report = atf.atf_solve(problem, a0, max_iter=spec.max_iter)
        return atf.a_to_h(a, fspec.N), report

    extras = spec.constraints()
    mu = spec.mu[0] if len(spec.mu) == 1 else spec.mu
    chain = solver.make_chain(fspec, extras, relaxation=mu)
    h, report = solver.run(chain, initial_vector(spec), tol=spec.tol, max_iter=spec.max_iter)
    for c in extras:
        if isinstance(c, NyquistConstraint):
            h = project_nyquist(h, c)
    return h[: fspec.N].copy(), report


def frequency_response(h, M: int):
    """``(omega, magnitude_db, phase)`` on bins ``0..M//2`` of an M-point DFT."""
    H = np.fft.rfft(np.asarray(h, dtype=float), n=M)
    omega = 2 * np.pi * np.arange(H.shape[0]) / M
    with np.errstate(divide="ignore"):
        mag_db = 20 * np.log10(np.abs(H))
    return omega, mag_db, np.angle(H)


def export(h, report, out_dir, spec: DesignSpecFile | None = None) -> list:
    """Write ``coeffs.txt``, ``response.csv``, ``report.json`` (and ``step.csv``).

    Returns the paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    h = np.asarray(h, dtype=float)
    M = spec.filter.M if spec is not None else max(1024, 2 * h.shape[0])
    written = []

    path = os.path.join(out_dir, "coeffs.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{x:.17g}\n" for x in h)
    written.append(path)

    path = os.path.join(out_dir, "response.csv")
    omega, mag_db, phase = frequency_response(h, M)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("omega,magnitude_db,phase_rad\n")
        for row in zip(omega, mag_db, phase):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    written.append(path)

    info = report.as_dict()
    if spec is not None:
        info["method"] = spec.method
        info["N"] = spec.filter.N
        info["M"] = spec.filter.M
        padded = np.zeros(M)
        padded[: h.shape[0]] = h
        info["band_residuals"] = band_residuals(padded, spec.filter)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)

    if spec is not None and spec.step_response is not None:
        c = next(c for c in spec.constraints() if isinstance(c, SoftLinearConstraint))
        y = c.output(h)
        path = os.path.join(out_dir, "step.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("n,output,lower,upper\n")
            for n, (v, lo, hi) in enumerate(zip(y, c.b1, c.b2)):
                fh.write(f"{n},{float(v)!r},{float(lo)!r},{float(hi)!r}\n")
        written.append(path)
    return written


def read_coeffs(path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pocsfir", description="Constrained FIR design by alternating projections.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at debug level")
    sub = parser.add_subparsers(dest="command", required=True)
    d = sub.add_parser("design", help="design a filter from a spec file")
    d.add_argument("specfile")
    d.add_argument("--out", default="design_out", help="output directory (default: %(default)s)")
    d.add_argument("--init", choices=("zero", "ideal"), help="override the starting vector")
    d.add_argument("--tol", type=float, help="override the step tolerance")
    d.add_argument("--max-iter", type=int, help="override the iteration budget")
    d.add_argument("--seed", type=int, help="reserved for randomized runs; ignored by deterministic designs")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        spec = parse_spec(args.specfile)
        spec = with_overrides(spec, init=args.init, tol=args.tol, max_iter=args.max_iter)
        if args.tol is not None and not args.tol > 0:
            raise PocsError(f"--tol must be positive, got {args.tol}")
        if args.max_iter is not None and args.max_iter <= 0:
            raise PocsError(f"--max-iter must be positive, got {args.max_iter}")
    except (OSError, PocsError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR

    echoed = dumps(spec)
    log.info("resolved spec:\n%s", echoed)
    try:
        h, report = design(spec)
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "spec.ini"), "w", encoding="utf-8") as fh:
            fh.write(echoed)
        written = export(h, report, args.out, spec)
    except PocsError as exc:
        log.error("design failed: %s", exc)
        return EXIT_ERROR
    except OSError as exc:
        log.error("cannot write artifacts: %s", exc)
        return EXIT_ERROR

    log.info("%d iterations, final step %.3e, terminated by %s", report.iterations, report.final_step, report.terminated_by)
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
