"""Scenario configuration (strict JSON) and batch execution.

Example::

    {"dimension": 2,
     "hamiltonian": {"pauli": [0, 1, 0, 0]},
     "initial": {"pauli": [0.5, 0, 0, 0.25]},
     "entropy": {"preset": "S3"},
     "integrator": {"method": "isospectral", "dt": 0.01, "t_end": 10.0, "sample_every": 10},
     "metric_signature": [1, 1],
     "diagnostics": {"n_max": 6, "analytic_compare": true},
     "outputs": {"csv": "traj.csv", "svg": null}}

Matrices are lists of rows; complex entries are written ``[re, im]``.
``initial`` may instead be a mixture ``{"weights": [...], "states": [...]}``
whose states use the same forms.  ``hamiltonian`` may be ``{"casimir":
<entropy>}`` for a Casimir-built H.  Unknown fields are rejected.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import METHODS, ModelSpec, integrate
from .errors import ValidationError
from .functionals import EntropySpec, HamiltonianSpec
from .matrix import as_hermitian, bloch_vector, hermitian_eig, pauli_matrix
from .output import emit_csv, emit_svg, resolve_channels
from .scenarios import frobenius_errors
from .spectral import as_signature, conservation_report

DENSITY_TOL = 1e-10

_TOP = {"dimension", "hamiltonian", "initial", "entropy", "integrator", "metric_signature", "diagnostics",
        "outputs"}
_REQUIRED = {"dimension", "hamiltonian", "initial", "entropy", "integrator"}


def _keys(obj, allowed, path, required=()):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", path)
    extra = set(obj) - set(allowed)
    if extra:
        raise ValidationError(f"unknown field(s) {sorted(extra)}", path)
    missing = set(required) - set(obj)
    if missing:
        raise ValidationError(f"missing field(s) {sorted(missing)}", path)


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"expected a number, got {x!r}", path)
    return float(x)


def _entry(x, path):
    if isinstance(x, list):
        if len(x) != 2:
            raise ValidationError("complex entries are [re, im]", path)
        return complex(_number(x[0], path), _number(x[1], path))
    return complex(_number(x, path))


def parse_matrix(obj, d, path):
    if not isinstance(obj, list) or len(obj) != d or any(not isinstance(r, list) or len(r) != d for r in obj):
        raise ValidationError(f"expected a {d}x{d} list of rows", path)
    M = np.array([[_entry(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(obj)])
    try:
        return as_hermitian(M)
    except ValidationError as exc:
        raise ValidationError(str(exc), path) from None


def _pauli(obj, d, path):
    if d != 2:
        raise ValidationError("Pauli coefficients are only accepted for dimension 2", path)
    if not isinstance(obj, list) or len(obj) != 4:
        raise ValidationError("expected 4 Pauli coefficients [c0, c1, c2, c3]", path)
    return pauli_matrix([_number(c, f"{path}[{i}]") for i, c in enumerate(obj)])


def _plain_state(obj, d, path):
    _keys(obj, {"pauli", "matrix"}, path)
    if len(obj) != 1:
        raise ValidationError("expected exactly one of 'pauli' or 'matrix'", path)
    if "pauli" in obj:
        return _pauli(obj["pauli"], d, f"{path}.pauli")
    return parse_matrix(obj["matrix"], d, f"{path}.matrix")


def _check_density(rho, path):
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValidationError(f"density matrix has trace {tr!r}, expected 1", path)
    lo = float(hermitian_eig(rho).eigenvalues[-1])
    if lo < -DENSITY_TOL:
        raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}", path)


@dataclass
class ScenarioConfig:
    dimension: int
    hamiltonian: HamiltonianSpec
    initial: np.ndarray
    entropy: EntropySpec
    method: str = "rk4"
    dt: float = 1e-3
    t_end: float = 10.0
    sample_every: int = 1
    metric_signature: np.ndarray | None = None
    n_max: int = 6
    analytic_compare: bool = False
    csv: str | None = None
    svg: str | None = None
    svg_channels: list = field(default_factory=lambda: ["lambda"])
    components: list | None = None
    raw: dict = field(default_factory=dict)

    @property
    def model(self):
        return ModelSpec(self.dimension, self.hamiltonian, self.entropy)

    @classmethod
    def from_json(cls, obj):
        _keys(obj, _TOP, "config", _REQUIRED)
        d = obj["dimension"]
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise ValidationError(f"expected a positive integer, got {d!r}", "dimension")

        ham = obj["hamiltonian"]
        _keys(ham, {"pauli", "matrix", "casimir"}, "hamiltonian")
        if len(ham) != 1:
            raise ValidationError("expected exactly one of 'pauli', 'matrix' or 'casimir'", "hamiltonian")
        if "casimir" in ham:
            hspec = HamiltonianSpec(casimir=EntropySpec.from_json(ham["casimir"], "hamiltonian.casimir"))
        elif "pauli" in ham:
            hspec = HamiltonianSpec(matrix=_pauli(ham["pauli"], d, "hamiltonian.pauli"))
        else:
            hspec = HamiltonianSpec(matrix=parse_matrix(ham["matrix"], d, "hamiltonian.matrix"))

        init = obj["initial"]
        _keys(init, {"pauli", "matrix", "weights", "states", "density"}, "initial")
        density = init.get("density", True)
        if not isinstance(density, bool):
            raise ValidationError("expected true or false", "initial.density")
        forms = {k for k in init if k != "density"}
        components = None
        if forms == {"weights", "states"}:
            weights, states = init["weights"], init["states"]
            if not isinstance(weights, list) or not isinstance(states, list) or len(weights) != len(states) \
                    or not weights:
                raise ValidationError("weights and states must be non-empty lists of equal length", "initial")
            w = [_number(p, f"initial.weights[{j}]") for j, p in enumerate(weights)]
            if any(p <= 0 for p in w) or abs(sum(w) - 1.0) > DENSITY_TOL:
                raise ValidationError(f"weights must be positive and sum to 1, got {w}", "initial.weights")
            mats = [_plain_state(s, d, f"initial.states[{j}]") for j, s in enumerate(states)]
            if density:
                for j, m in enumerate(mats):
                    _check_density(m, f"initial.states[{j}]")
            components = list(zip(w, mats))
            rho0 = sum(p * m for p, m in components)
        elif len(forms) == 1 and forms <= {"pauli", "matrix"}:
            rho0 = _plain_state({k: init[k] for k in forms}, d, "initial")
        else:
            raise ValidationError("expected 'pauli', 'matrix', or 'weights' with 'states'", "initial")
        if density:
            _check_density(rho0, "initial")

        entropy = EntropySpec.from_json(obj["entropy"], "entropy")

        integ = obj["integrator"]
        _keys(integ, {"method", "dt", "t_end", "sample_every"}, "integrator", {"method", "dt", "t_end"})
        method = integ["method"]
        if method not in METHODS:
            raise ValidationError(f"expected one of {list(METHODS)}, got {method!r}", "integrator.method")
        dt = _number(integ["dt"], "integrator.dt")
        if dt <= 0:
            raise ValidationError("must be positive", "integrator.dt")
        t_end = _number(integ["t_end"], "integrator.t_end")
        if t_end < 0:
            raise ValidationError("must be nonnegative", "integrator.t_end")
        every = integ.get("sample_every", 1)
        if isinstance(every, bool) or not isinstance(every, int) or every < 1:
            raise ValidationError("expected a positive integer", "integrator.sample_every")

        sig = obj.get("metric_signature")
        if sig is not None:
            try:
                sig = as_signature(sig, d)
            except ValidationError as exc:
                raise ValidationError(str(exc), "metric_signature") from None

        diag = obj.get("diagnostics", {})
        _keys(diag, {"n_max", "analytic_compare"}, "diagnostics")
        n_max = diag.get("n_max", 6)
        if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
            raise ValidationError("expected a positive integer", "diagnostics.n_max")
        compare = diag.get("analytic_compare", False)
        if not isinstance(compare, bool):
            raise ValidationError("expected true or false", "diagnostics.analytic_compare")
        if compare:
            if d != 2 or entropy.name != "S3" or not hspec.is_linear:
                raise ValidationError("analytic comparison needs a 2x2 S3 model with linear H",
                                      "diagnostics.analytic_compare")
            if abs(np.trace(rho0).real - 1.0) > DENSITY_TOL:
                raise ValidationError("analytic comparison needs Tr rho0 = 1", "diagnostics.analytic_compare")

        outs = obj.get("outputs", {})
        _keys(outs, {"csv", "svg"}, "outputs")
        csv_path = outs.get("csv")
        if csv_path is not None and not isinstance(csv_path, str):
            raise ValidationError("expected a path or null", "outputs.csv")
        svg = outs.get("svg")
        svg_path, svg_channels = None, ["lambda"]
        if isinstance(svg, str):
            svg_path = svg
        elif isinstance(svg, dict):
            _keys(svg, {"path", "channels"}, "outputs.svg", {"path"})
            svg_path = svg["path"]
            svg_channels = svg.get("channels", svg_channels)
            if not isinstance(svg_path, str) or not isinstance(svg_channels, list):
                raise ValidationError("expected {'path': str, 'channels': [str]}", "outputs.svg")
        elif svg is not None:
            raise ValidationError("expected a path, an object, or null", "outputs.svg")

        return cls(d, hspec, rho0, entropy, method, dt, t_end, every, sig, n_max, compare, csv_path, svg_path,
                   svg_channels, components, raw=obj)

    @classmethod
    def load(cls, path):
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(obj)


@dataclass
class RunReport:
    config: dict
    conservation: dict
    oracle: dict | None
    duration_s: float
    outputs: list
    trajectory: object = None

    def to_json(self):
        return {"config": self.config, "conservation": self.conservation, "oracle": self.oracle,
                "duration_s": self.duration_s, "outputs": self.outputs}


def run_scenario(config, out_dir=None):
    """Integrate a configured scenario, write its outputs, and summarize."""
    start = time.perf_counter()
    model = config.model
    traj = integrate(model, config.initial, config.method, config.dt, config.t_end, config.sample_every,
                     config.n_max)
    report = conservation_report(traj, config.n_max, config.metric_signature)

    errs, oracle = None, None
    if config.analytic_compare:
        errs = frobenius_errors(traj, config.hamiltonian.matrix, bloch_vector(config.initial))
        oracle = {"max_frobenius_error": float(errs.max()), "final_frobenius_error": float(errs[-1])}

    base = Path(out_dir) if out_dir is not None else Path(".")
    written = []
    if config.svg is not None:
        resolve_channels(traj, config.svg_channels)
    if config.csv is not None or config.svg is not None:
        base.mkdir(parents=True, exist_ok=True)
    if config.csv is not None:
        written.append(str(emit_csv(traj, base / config.csv, config.n_max, errs)))
    if config.svg is not None:
        written.append(str(emit_svg(traj, config.svg_channels, base / config.svg)))
    return RunReport(config.raw, report, oracle, time.perf_counter() - start, written, traj)
