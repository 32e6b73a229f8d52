"""Command-line interface.

Problem files are JSON: a dimension (or qubit count), a drift and controls
given either as Pauli-string expressions or dense matrices, one target
(unitary or Hamiltonian), and options.  Commands emit a JSON report on stdout
and a short human summary on stderr; exit codes are 0 (success), 1
(computation failed), 2 (bad input or usage).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import dataclass

import numpy as np

from .bounds import (
    chebyshev_degree_for,
    hamiltonian_speed_limit,
    optimize_symmetry,
    uniform_speed_limit,
    unitary_speed_limit,
)
from .lie import Symmetry, commutant_basis, quadratic_symmetry_basis
from .matcore import (
    DimensionCapError,
    PAULI,
    QslError,
    ValidationError,
    hermitize,
    operator_norm,
    permutation_operator,
    require_hermitian,
    require_unitary,
)
from .models import (
    ControlSystem,
    PulseSchedule,
    coupled_qubit_model,
    global_controls,
    hopping_chain_model,
    propagate_piecewise,
    rydberg_chain_model,
    syk_model,
)
from .perturb import restore_symmetry


class PauliParseError(QslError):
    """Pauli expression rejected; ``position`` is the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ProblemFormatError(QslError):
    """Problem file violates the schema."""


_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?")
_FACTOR = re.compile(r"([XYZI])(\d+)")
_MINUS = "-−"  # ASCII hyphen and the unicode minus sign


def parse_pauli_expression(text: str, n_qubits: int) -> np.ndarray:
    """Dense Hermitian matrix from a sum of weighted Pauli strings.

    Grammar: terms joined by '+'/'-'; each term is an optional signed decimal
    coefficient (default 1), an optional '*', then one or more factors like
    ``X0`` or ``Z3`` (letter in XYZI, 0-based qubit index).  Factors in one
    term act on distinct qubits and multiply as tensor components.
    """
    if n_qubits < 1:
        raise ValidationError("need at least one qubit")
    dim = 2**n_qubits
    total = np.zeros((dim, dim), dtype=complex)
    pos, n = 0, len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    first = True
    while True:
        skip_ws()
        if pos >= n:
            if first:
                raise PauliParseError("empty expression", pos)
            break
        sign = 1.0
        if text[pos] == "+":
            pos += 1
        elif text[pos] in _MINUS:
            sign = -1.0
            pos += 1
        elif not first:
            raise PauliParseError("expected '+' or '-' between terms", pos)
        first = False
        skip_ws()
        coeff = 1.0
        m = _NUMBER.match(text, pos)
        if m:
            coeff = float(m.group())
            pos = m.end()
            skip_ws()
            if pos < n and text[pos] == "*":
                pos += 1
        sites: dict[int, str] = {}
        while True:
            skip_ws()
            fm = _FACTOR.match(text, pos)
            if not fm:
                break
            letter, idx_text = fm.groups()
            idx = int(idx_text)
            if idx >= n_qubits:
                raise PauliParseError(
                    f"qubit index {idx} out of range for {n_qubits} qubits", pos)
            if idx in sites:
                raise PauliParseError(f"duplicate qubit index {idx} in term", pos)
            sites[idx] = letter
            pos = fm.end()
        if not sites:
            raise PauliParseError("expected a Pauli factor like X0", pos)
        term = np.eye(1, dtype=complex)
        for q in range(n_qubits):
            term = np.kron(term, PAULI[sites.get(q, "I")])
        total += sign * coeff * term
    return total


@dataclass
class ProblemSpec:
    """A fully validated problem file with defaults filled in."""

    dimension: int
    qubits: int | None
    drift: np.ndarray
    controls: list[np.ndarray]
    target_unitary: np.ndarray | None
    target_hamiltonian: np.ndarray | None
    options: dict
    source: dict


def matrix_to_json(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _matrix_from_json(obj, what: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{what}: matrix entries must be [re, im] "
                                 f"pairs ({exc})") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ProblemFormatError(f"{what}: expected a square nested array of "
                                 "[re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _hamiltonian_from_spec(obj, qubits, dimension, what: str) -> np.ndarray:
    if not isinstance(obj, dict) or len(set(obj) & {"pauli", "matrix"}) != 1:
        raise ProblemFormatError(f"{what}: expected exactly one of "
                                 "{'pauli': ...} or {'matrix': ...}")
    if "pauli" in obj:
        if qubits is None:
            raise ProblemFormatError(f"{what}: Pauli expressions need a "
                                     "'qubits' count")
        M = parse_pauli_expression(obj["pauli"], qubits)
    else:
        M = _matrix_from_json(obj["matrix"], what)
    if M.shape[0] != dimension:
        raise ProblemFormatError(f"{what}: dimension {M.shape[0]} does not "
                                 f"match the declared {dimension}")
    try:
        return require_hermitian(M)
    except (QslError, ValueError) as exc:
        raise ProblemFormatError(f"{what}: {exc}") from None


_NAMED_UNITARIES = {"CNOT", "SWAP"}
_OPTION_KEYS = {"kind", "method", "degree", "sigma_min", "sigma_max", "seed",
                "tol", "optimize_symmetry"}


def _named_unitary(name: str, dimension: int) -> np.ndarray:
    if name == "CNOT":
        if dimension != 4:
            raise ProblemFormatError("CNOT needs dimension 4")
        return np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    if name == "SWAP":
        if dimension != 4:
            raise ProblemFormatError("SWAP (two-qubit gate) needs dimension 4")
        return permutation_operator([1, 0], [2, 2])
    raise ProblemFormatError(f"unknown named unitary {name!r}")


def load_problem(path: str) -> ProblemSpec:
    """Parse and validate a problem file; fills option defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ProblemFormatError("problem file must be a JSON object")
    unknown = set(data) - {"qubits", "dimension", "drift", "controls",
                           "target", "options"}
    if unknown:
        raise ProblemFormatError(f"unknown top-level keys: {sorted(unknown)}")

    qubits = data.get("qubits")
    dimension = data.get("dimension")
    if qubits is None and dimension is None:
        raise ProblemFormatError("need 'qubits' or 'dimension'")
    if qubits is not None:
        if not isinstance(qubits, int) or qubits < 1:
            raise ProblemFormatError("'qubits' must be a positive integer")
        if dimension is not None and dimension != 2**qubits:
            raise ProblemFormatError("'dimension' contradicts 'qubits'")
        dimension = 2**qubits
    if not isinstance(dimension, int) or dimension < 2:
        raise ProblemFormatError("'dimension' must be an integer >= 2")

    if "drift" not in data:
        raise ProblemFormatError("missing 'drift'")
    drift = _hamiltonian_from_spec(data["drift"], qubits, dimension, "drift")
    controls_spec = data.get("controls")
    if not isinstance(controls_spec, list) or not controls_spec:
        raise ProblemFormatError("'controls' must be a nonempty list")
    controls = [_hamiltonian_from_spec(c, qubits, dimension, f"controls[{k}]")
                for k, c in enumerate(controls_spec)]

    target = data.get("target")
    if not isinstance(target, dict) or len(set(target) & {"unitary", "hamiltonian"}) != 1:
        raise ProblemFormatError("'target' must hold exactly one of 'unitary' "
                                 "or 'hamiltonian'")
    target_u = target_h = None
    if "unitary" in target:
        u = target["unitary"]
        if not isinstance(u, dict) or len(set(u) & {"named", "matrix"}) != 1:
            raise ProblemFormatError("target unitary needs exactly one of "
                                     "'named' or 'matrix'")
        if "named" in u:
            target_u = _named_unitary(str(u["named"]), dimension)
        else:
            M = _matrix_from_json(u["matrix"], "target unitary")
            if M.shape[0] != dimension:
                raise ProblemFormatError("target unitary dimension mismatch")
            try:
                target_u = require_unitary(M)
            except (QslError, ValueError) as exc:
                raise ProblemFormatError(f"target unitary: {exc}") from None
    else:
        target_h = _hamiltonian_from_spec(target["hamiltonian"], qubits,
                                          dimension, "target hamiltonian")

    options = dict(data.get("options") or {})
    extra = set(options) - _OPTION_KEYS
    if extra:
        raise ProblemFormatError(f"unknown option keys: {sorted(extra)}")
    options.setdefault("method", "exact" if dimension <= 64 else "chebyshev")
    options.setdefault("degree", 64)
    options.setdefault("seed", 0)
    options.setdefault("optimize_symmetry", 0)
    if options["method"] not in ("exact", "commutator", "chebyshev"):
        raise ProblemFormatError(f"unknown method {options['method']!r}")
    if options.get("kind") not in (None, "linear", "quadratic"):
        raise ProblemFormatError(f"unknown kind {options.get('kind')!r}")

    source = {
        "qubits": qubits, "dimension": dimension, "drift": data["drift"],
        "controls": data["controls"], "target": data["target"],
        "options": options,
    }
    return ProblemSpec(dimension, qubits, drift, controls, target_u, target_h,
                       options, source)


def _merge_options(spec: ProblemSpec, args) -> dict:
    opts = dict(spec.options)
    for key, attr in (("kind", "kind"), ("method", "method"),
                      ("degree", "degree"), ("sigma_min", "sigma_min"),
                      ("sigma_max", "sigma_max"), ("seed", "seed"),
                      ("tol", "tol"), ("optimize_symmetry", "optimize_symmetry")):
        v = getattr(args, attr, None)
        if v is not None:
            opts[key] = v
    return opts


def _bound_report_dict(rep) -> dict:
    out = {
        "bound_time": float(rep.bound_time),
        "theorem": rep.theorem,
        "projection_method": rep.projection_method,
        "intermediates": {k: float(v) for k, v in rep.intermediates.items()},
    }
    if rep.warnings:
        out["warnings"] = list(rep.warnings)
    return out


def _symmetry_basis(spec: ProblemSpec, kind: str, tol) -> list[Symmetry]:
    kwargs = {} if tol is None else {"tol": tol}
    if kind == "quadratic":
        return quadratic_symmetry_basis(spec.controls, **kwargs)
    return commutant_basis(spec.controls, **kwargs)


def cmd_symmetries(args) -> dict:
    spec = load_problem(args.problem)
    opts = _merge_options(spec, args)
    kinds = [opts["kind"]] if opts.get("kind") else ["linear", "quadratic"]
    report: dict = {"inputs": spec.source, "symmetries": {}}
    for kind in kinds:
        try:
            basis = _symmetry_basis(spec, kind, opts.get("tol"))
        except DimensionCapError as exc:
            report["symmetries"][kind] = {"skipped": str(exc)}
            continue
        entry: dict = {"count": len(basis)}
        if basis and basis[0].dimension <= 16:
            entry["matrices"] = [matrix_to_json(b.matrix) for b in basis]
        report["symmetries"][kind] = entry
    return report


def _choose_symmetry(basis: list[Symmetry], objective, opts) -> Symmetry:
    return optimize_symmetry(basis, objective,
                             iterations=int(opts.get("optimize_symmetry") or 0),
                             seed=int(opts.get("seed") or 0))


def cmd_bound_unitary(args) -> dict:
    spec = load_problem(args.problem)
    if spec.target_unitary is None:
        raise ProblemFormatError("'bound unitary' needs a unitary target")
    opts = _merge_options(spec, args)
    kind = opts.get("kind") or "quadratic"
    basis = _symmetry_basis(spec, kind, opts.get("tol"))

    def objective(sym: Symmetry) -> float:
        pert = restore_symmetry(sym, spec.drift)
        return unitary_speed_limit(spec.target_unitary, sym, pert).bound_time

    best = _choose_symmetry(basis, objective, opts)
    pert = restore_symmetry(best, spec.drift)
    rep = unitary_speed_limit(spec.target_unitary, best, pert, drift=spec.drift)
    out = {"inputs": spec.source, "symmetry_kind": kind,
           "symmetry_count": len(basis), **_bound_report_dict(rep)}
    if pert.op_norm > 0:
        out["uniform_bound"] = uniform_speed_limit(pert)
    return out


def cmd_bound_hamiltonian(args) -> dict:
    spec = load_problem(args.problem)
    if spec.target_hamiltonian is None:
        raise ProblemFormatError("'bound hamiltonian' needs a Hamiltonian target")
    opts = _merge_options(spec, args)
    kind = opts.get("kind") or "linear"
    basis = _symmetry_basis(spec, kind, opts.get("tol"))
    method = opts["method"]
    kwargs = {"method": method}
    if method == "chebyshev":
        kwargs["degree"] = int(opts["degree"])
        if opts.get("sigma_min") is not None:
            kwargs["sigma_min_est"] = float(opts["sigma_min"])
        if opts.get("sigma_max") is not None:
            kwargs["sigma_max_est"] = float(opts["sigma_max"])
    if opts.get("tol") is not None:
        kwargs["tol_degeneracy"] = float(opts["tol"])

    def objective(sym: Symmetry) -> float:
        pert = restore_symmetry(sym, spec.drift)
        return hamiltonian_speed_limit(spec.target_hamiltonian, sym, pert,
                                       **kwargs).bound_time

    best = _choose_symmetry(basis, objective, opts)
    pert = restore_symmetry(best, spec.drift)
    rep = hamiltonian_speed_limit(spec.target_hamiltonian, best, pert, **kwargs)
    out = {"inputs": spec.source, "symmetry_kind": kind,
           "symmetry_count": len(basis), **_bound_report_dict(rep)}
    if pert.op_norm > 0:
        out["uniform_bound"] = uniform_speed_limit(pert)
    return out


def cmd_reproduce(args) -> dict:
    model = args.model
    if model == "cnot":
        g = args.g if args.g is not None else 1.0
        bundle = coupled_qubit_model(g)
        rep = unitary_speed_limit(bundle.target_unitary, bundle.symmetry,
                                  bundle.perturbation)
        refs = bundle.references
        return {"model": "cnot", "parameters": {"g": g},
                **_bound_report_dict(rep),
                "closed_form": refs["bound_time"],
                "literature_time": refs["literature_time"],
                "literature_ratio": refs["literature_time"] / rep.bound_time}
    if model == "swap":
        N = args.N if args.N is not None else 3
        J = args.J if args.J is not None else 1.0
        bundle = hopping_chain_model(N, J)
        refs = bundle.references
        sym = bundle.symmetry
        bound = refs["breaking_norm"] / (2.0 * sym.frobenius
                                         * refs["gap_over_bound"])
        rep_exact = unitary_speed_limit(bundle.target_unitary, sym,
                                        bundle.perturbation)
        return {"model": "swap", "parameters": {"N": N, "J": J},
                "bound_time": bound, "theorem": "T1b",
                "closed_form": refs["closed_form"],
                "bound_time_exact": rep_exact.bound_time,
                "intermediates": {
                    "breaking_norm": refs["breaking_norm"],
                    "breaking_norm_exact": refs["breaking_norm_exact"],
                    "gap_over_bound": refs["gap_over_bound"],
                    "delta_h_op_norm": refs["delta_h_op_norm"],
                    "symmetry_frobenius": sym.frobenius,
                }}
    if model == "rydberg":
        N = args.N if args.N is not None else 5
        J = args.J if args.J is not None else 1.0
        bundle = rydberg_chain_model(N, C=args.C, a=args.a, J=J,
                                     g=args.g if args.g is not None else 0.5,
                                     h=args.h)
        method = args.method or ("exact" if N <= 6 else "chebyshev")
        kwargs = {"method": method}
        if method == "chebyshev":
            lo, hi = bundle.spectral_estimates
            kwargs.update(sigma_min_est=lo, sigma_max_est=hi,
                          degree=args.degree or chebyshev_degree_for(1e-2, lo, hi))
        rep = hamiltonian_speed_limit(bundle.target_hamiltonian,
                                      bundle.symmetry, bundle.perturbation,
                                      **kwargs)
        refs = bundle.references
        return {"model": "rydberg",
                "parameters": {"N": N, "C": args.C, "a": args.a, "J": J,
                               "g": args.g if args.g is not None else 0.5,
                               "h": args.h},
                **_bound_report_dict(rep),
                "delta_h_closed_form": refs["delta_h_closed_form"],
                "trend_limit": refs["trend_limit"]}
    if model == "syk":
        n = args.n_majorana
        seed = args.seed if args.seed is not None else 0
        H = syk_model(n, seed=seed, mu=args.mu)
        basis = commutant_basis(global_controls(n // 2))

        def objective(sym: Symmetry) -> float:
            pert = restore_symmetry(sym, H)
            return hamiltonian_speed_limit(H, sym, pert,
                                           method="exact").bound_time

        best = optimize_symmetry(basis, objective,
                                 iterations=args.iterations, seed=seed)
        pert = restore_symmetry(best, H)
        rep = hamiltonian_speed_limit(H, best, pert, method="exact")
        return {"model": "syk",
                "parameters": {"n_majorana": n, "seed": seed, "mu": args.mu,
                               "iterations": args.iterations},
                "commutant_dimension": len(basis),
                **_bound_report_dict(rep)}
    raise ProblemFormatError(f"unknown model {model!r}")


def cmd_verify_duhamel(args) -> dict:
    spec = load_problem(args.problem)
    system = ControlSystem(spec.drift, spec.controls, label="duhamel-check")
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    d = system.dimension
    violations = 0
    worst = -math.inf
    for _ in range(args.trials):
        raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        dH = hermitize(raw)
        dH *= rng.uniform(0.05, 0.5) * max(1.0, operator_norm(system.drift)) \
            / max(operator_norm(dH), 1e-12)
        segments = int(rng.integers(1, 9))
        schedule = PulseSchedule(float(rng.uniform(0.05, 0.5)),
                                 rng.standard_normal((len(system.controls),
                                                      segments)))
        perturbed = ControlSystem(system.drift + dH, system.controls)
        lhs = operator_norm(propagate_piecewise(system, schedule)
                            - propagate_piecewise(perturbed, schedule))
        rhs = schedule.total_time * operator_norm(dH) + 1e-6
        worst = max(worst, lhs - rhs)
        if lhs > rhs:
            violations += 1
    report = {"inputs": spec.source, "trials": args.trials,
              "violations": violations, "max_lhs_minus_rhs": worst}
    if violations:
        report["_exit"] = 1
    return report


def _summarize(report: dict) -> list[str]:
    lines = []
    if "model" in report:
        lines.append(f"model: {report['model']}")
    if "bound_time" in report:
        lines.append(f"bound_time: {report['bound_time']:.9g}  "
                     f"(theorem {report.get('theorem', '?')})")
    if "symmetries" in report:
        for kind, entry in report["symmetries"].items():
            what = entry.get("count", entry.get("skipped"))
            lines.append(f"{kind} symmetries: {what}")
    if "violations" in report:
        lines.append(f"violations: {report['violations']}/{report['trials']}")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return lines


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value)}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsl",
        description="Lower bounds on quantum control time from symmetries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json-only", action="store_true",
                       help="suppress the human summary on stderr")
        p.add_argument("--seed", type=int, default=None)

    def bound_flags(p):
        p.add_argument("--method", choices=["exact", "commutator", "chebyshev"],
                       default=None)
        p.add_argument("--degree", type=int, default=None)
        p.add_argument("--sigma-min", dest="sigma_min", type=float, default=None)
        p.add_argument("--sigma-max", dest="sigma_max", type=float, default=None)
        p.add_argument("--kind", choices=["linear", "quadratic"], default=None)
        p.add_argument("--optimize-symmetry", dest="optimize_symmetry",
                       type=int, default=None, metavar="ITERS")
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("symmetries", help="list symmetry bases for a problem")
    p.add_argument("problem")
    p.add_argument("--kind", choices=["linear", "quadratic"], default=None)
    p.add_argument("--tol", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_symmetries)

    pb = sub.add_parser("bound", help="evaluate a speed limit")
    bsub = pb.add_subparsers(dest="target_kind", required=True)
    for name, fn in (("unitary", cmd_bound_unitary),
                     ("hamiltonian", cmd_bound_hamiltonian)):
        p = bsub.add_parser(name)
        p.add_argument("problem")
        bound_flags(p)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("reproduce", help="run a built-in reference model")
    p.add_argument("model", choices=["cnot", "swap", "rydberg", "syk"])
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--J", type=float, default=None)
    p.add_argument("--g", type=float, default=None,
                   help="coupling for cnot, transverse field for rydberg")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--n-majorana", dest="n_majorana", type=int, default=6)
    p.add_argument("--iterations", type=int, default=60)
    p.add_argument("--method", choices=["exact", "commutator", "chebyshev"],
                   default=None)
    p.add_argument("--degree", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_reproduce)

    pv = sub.add_parser("verify", help="property checks by simulation")
    vsub = pv.add_subparsers(dest="check", required=True)
    p = vsub.add_parser("duhamel")
    p.add_argument("problem")
    p.add_argument("--trials", type=int, default=20)
    common(p)
    p.set_defaults(func=cmd_verify_duhamel)

    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        report = args.func(args)
    except (ProblemFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    code = int(report.pop("_exit", 0))
    report["elapsed_seconds"] = round(time.perf_counter() - t0, 6)
    print(json.dumps(report, indent=2, sort_keys=True, default=_json_default))
    if not args.json_only:
        for line in _summarize(report):
            print(line, file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
