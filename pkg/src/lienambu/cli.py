"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, run_scenario
from .errors import NumericalError, ValidationError
from .functionals import entropy_gradient, entropy_value, fd_gradient_oracle, hamiltonian_gradient, hamiltonian_value
from .matrix import PAULI, commutator, hermitian_eig
from .scenarios import analytic_eigvecs, analytic_rho_2x2
from .spectral import spectrum_from_moments
from .tensor import (
    build_higher_metric,
    build_structure_constants,
    casimir_via_contraction,
    coordinate_bracket_field,
    triple_bracket,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
BRACKET_TOL = 1e-12
GRADCHECK_RTOL = 1e-6


def _matrix_json(M):
    M = np.asarray(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _simulate_one(path, out):
    cfg = ScenarioConfig.load(path)
    return run_scenario(cfg, out).to_json()


def cmd_simulate(args):
    paths = args.config
    outs = [args.out] * len(paths)
    if len(paths) > 1:
        outs = [str(Path(args.out or ".") / Path(p).stem) for p in paths]
    if args.jobs > 1 and len(paths) > 1:
        # validate everything up front so a bad config fails before any run starts
        for p in paths:
            ScenarioConfig.load(p)
        with ProcessPoolExecutor(args.jobs) as pool:
            reports = list(pool.map(_simulate_one, paths, outs))
    else:
        reports = [_simulate_one(p, o) for p, o in zip(paths, outs)]
    print(json.dumps(reports[0] if len(reports) == 1 else reports, indent=2))
    return EXIT_OK


def cmd_oracle(args):
    r = np.array([0.0, 0.0, args.eps / 2.0])
    rho = analytic_rho_2x2(args.E * PAULI[1], r, args.t)
    w, phi1, phi2 = analytic_eigvecs(args.E, args.eps, args.t)
    print(json.dumps({
        "omega": w,
        "rho": _matrix_json(rho),
        "eigenvalues": [float(x) for x in hermitian_eig(rho).eigenvalues],
        "phi1": [[float(z.real), float(z.imag)] for z in phi1],
        "phi2": [[float(z.real), float(z.imag)] for z in phi2],
    }, indent=2))
    return EXIT_OK


def _random_hermitian(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (X + X.conj().T)


def verify_bracket(d, trials=50, seed=0):
    """Cross-check the raw tensor bracket against the trace/commutator forms."""
    rng = np.random.default_rng(seed)
    omega = build_structure_constants(d)
    bracket, field = 0.0, 0.0
    for _ in range(trials):
        F, G, H = (_random_hermitian(rng, d) for _ in range(3))
        bracket = max(bracket, abs(triple_bracket(F, G, H, omega) - np.trace(F @ commutator(G, H))))
        field = max(field, float(np.max(np.abs(coordinate_bracket_field(G, H, omega) - commutator(G, H)))))
    O = omega.omega
    antisym = 0.0
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        antisym = max(antisym, float(np.max(np.abs(O - sign * O.transpose(perm)))))
    metric = 0.0
    for n in range(1, 5):
        g = build_higher_metric(d, n)
        for _ in range(5):
            rho = _random_hermitian(rng, d)
            metric = max(metric, abs(casimir_via_contraction(rho, n, g) - np.trace(np.linalg.matrix_power(rho, n)).real))
    return {"bracket_vs_trace": float(bracket), "field_vs_commutator": field, "antisymmetry": antisym,
            "metric_vs_trace": float(metric)}


def cmd_verify_bracket(args):
    res = verify_bracket(args.dim)
    ok = all(v <= BRACKET_TOL for v in res.values())
    print(json.dumps({"dim": args.dim, "tolerance": BRACKET_TOL, "passed": ok, **res}, indent=2))
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_recover_spectrum(args):
    try:
        moments = [float(x) for x in args.moments.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse moments {args.moments!r}", "--moments") from None
    rec = spectrum_from_moments(moments, args.dim)
    print(json.dumps({"eigenvalues": [float(x) for x in rec.values], "residual": rec.residual,
                      "degenerate_zero": rec.degenerate_zero}, indent=2))
    return EXIT_OK


def _rel_err(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def cmd_gradcheck(args):
    cfg = ScenarioConfig.load(args.config)
    rho = cfg.initial
    s_err = _rel_err(entropy_gradient(cfg.entropy, rho), fd_gradient_oracle(lambda r: entropy_value(cfg.entropy, r), rho))
    h_err = _rel_err(hamiltonian_gradient(cfg.hamiltonian, rho),
                     fd_gradient_oracle(lambda r: hamiltonian_value(cfg.hamiltonian, r), rho))
    ok = s_err <= GRADCHECK_RTOL and h_err <= GRADCHECK_RTOL
    print(json.dumps({"entropy_rel_error": s_err, "hamiltonian_rel_error": h_err, "tolerance": GRADCHECK_RTOL,
                      "passed": ok}, indent=2))
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser():
    p = argparse.ArgumentParser(prog="lienambu", description="Lie-Nambu density-matrix dynamics")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one or more scenario configs")
    s.add_argument("--config", nargs="+", required=True)
    s.add_argument("--out", default=None, help="output directory (default: current directory)")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", help="closed-form two-level solution")
    s.add_argument("--E", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("verify-bracket", help="tensor bracket vs commutator checks")
    s.add_argument("--dim", type=int, choices=(2, 3), required=True)
    s.set_defaults(func=cmd_verify_bracket)

    s = sub.add_parser("recover-spectrum", help="spectrum from power sums")
    s.add_argument("--moments", required=True, help="comma-separated C_1,...,C_d")
    s.add_argument("--dim", type=int, required=True)
    s.set_defaults(func=cmd_recover_spectrum)

    s = sub.add_parser("gradcheck", help="closed-form vs finite-difference gradients")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        where = f" at t = {exc.t}" if exc.t is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
