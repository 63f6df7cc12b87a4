"""Command-line front end: ``slhs <command> [options]``.

Exit codes are shared by every command: 0 when the run completed and
nothing was violated, 2 when a violation was found (an inequality exceeded,
a positive measure, a negative probe slack), 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .basis_opt import OptimizerConfig
from .circuits import estimate_combo
from .families import (
    IsotropicSpec,
    WernerSpec,
    bell,
    isotropic,
    lhs_assemblage_state,
    random_separable,
    thresholds,
    werner,
)
from .inequalities import KINDS, VIOLATION_SLACK, InequalityKind, bound, bound_oracle, evaluate, max_violation
from .measure import PROBE_CHANNELS, MeasureVariant, axiom_b_trials, axiom_c_trials, n_measure, theorem1_probe
from .qcore import BipartiteState, DensityMatrix, LocalBasis, StateFileError, dumps_state, read_state
from .selftest import SelfTestAssumptions, adversarial_search, certify

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2

_S = 1 / np.sqrt(2)
NAMED_BASES = {
    "z": np.eye(2, dtype=complex),
    "x": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "y": np.array([[_S, _S], [1j * _S, -1j * _S]], dtype=complex),
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    state_path: str | None = None
    seed: int = 0
    tolerance: float = 1e-9
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.command in ("eval", "selftest", "measure") and self.state_path is None:
            raise CliError(f"{self.command} needs --state")
        if self.format not in ("json", "csv"):
            raise CliError(f"unknown format {self.format!r}")


def _config(args):
    return RunConfig(
        args.command,
        getattr(args, "state", None),
        args.seed,
        args.tolerance,
        args.out,
        args.format or _DEFAULT_FORMAT.get(args.command, "json"),
    )


_DEFAULT_FORMAT = {"sweep": "csv", "probe": "csv"}


# -- io helpers ------------------------------------------------------------------


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _emit(text, cfg: RunConfig):
    if cfg.output is None or cfg.output == "-":
        sys.stdout.write(text)
    else:
        Path(cfg.output).write_text(text)


def _flag(b):
    return "true" if b else "false"


def _load_state(cfg: RunConfig) -> BipartiteState:
    s = read_state(cfg.state_path)
    if not isinstance(s, BipartiteState):
        raise StateFileError("field 'dims': expected [dA, dB] for a bipartite state")
    return s


def load_basis(spec: str, d: int) -> LocalBasis:
    """``z`` (any ``d``), ``x`` or ``y`` (qubits), or a JSON file holding a unitary.

    The file holds either ``{"unitary": M}`` or ``M`` itself, with ``M`` a list
    of rows of ``[re, im]`` pairs whose columns are the basis vectors.
    """
    if spec == "z":
        return LocalBasis.computational(d)
    if spec in NAMED_BASES:
        if d != 2:
            raise CliError(f"named basis {spec!r} is a qubit basis; the state has d={d}")
        return LocalBasis(NAMED_BASES[spec])
    path = Path(spec)
    if not path.exists():
        raise CliError(f"basis {spec!r} is neither z, x, y nor an existing file")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{spec}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    rows = obj.get("unitary") if isinstance(obj, dict) else obj
    try:
        u = np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise CliError(f"{spec}: unitary must be a list of rows of [re, im] pairs") from exc
    if u.shape != (d, d):
        raise CliError(f"{spec}: expected a {d}x{d} unitary, got shape {u.shape}")
    return LocalBasis(u)


def _opt_cfg(args, restarts_default=8):
    restarts = args.restarts if args.restarts is not None else restarts_default
    return OptimizerConfig(restarts=restarts, seed=args.seed)


# -- commands --------------------------------------------------------------------


def cmd_eval(args, cfg):
    s = _load_state(cfg)
    if args.optimize:
        rep = max_violation(s, args.ineq, _opt_cfg(args))
    else:
        rep = evaluate(s, args.ineq, load_basis(args.basis_a, s.dA), load_basis(args.basis_b, s.dB))
    if cfg.format == "csv":
        text = _csv([("kind", "lhs", "bound", "violated"), (rep.kind.value, repr(rep.lhs), repr(rep.bound), _flag(rep.violated))])
    else:
        text = _json(rep.to_dict())
    _emit(text, cfg)
    return EXIT_VIOLATED if rep.violated else EXIT_OK


def _grid(lo, hi, steps):
    if steps < 1:
        raise CliError("the grid is empty (steps must be at least 1)")
    return np.array([lo]) if steps == 1 else np.linspace(lo, hi, steps)


def sweep_rows(family, ineq, ps, seconds):
    """Rows ``(p, alpha_or_d, lhs, bound, violated)`` at the computational bases."""
    kind = InequalityKind(ineq)
    rows = []
    for second in seconds:
        for p in ps:
            if family == "isotropic":
                d = int(second)
                s = isotropic(IsotropicSpec(d, float(p)))
            else:
                d = 2
                wkind = "phi_plus" if family == "werner-phi" else "psi_plus"
                s = werner(WernerSpec(float(p), float(second), wkind))
            eye = np.eye(d, dtype=complex)
            lhs = _kernels.inequality_lhs(np.ascontiguousarray(s.mat), eye, eye, d, kind.code)
            b = bound(kind, d)
            rows.append((float(p), second, lhs, b, lhs > b + VIOLATION_SLACK))
    return rows


def cmd_sweep(args, cfg):
    ps = _grid(args.p_min, args.p_max, args.p_steps)
    if args.family == "isotropic":
        seconds = [int(d) for d in (args.d or [3])]
        if any(d < 2 for d in seconds):
            raise CliError("isotropic sweeps need d >= 2")
    elif args.alpha_steps is not None:
        seconds = [float(a) for a in _grid(0.0, 1.0, args.alpha_steps)]
    else:
        seconds = [float(a) for a in (args.alpha or [0.5])]
    if not seconds:
        raise CliError("the grid is empty")
    rows = sweep_rows(args.family, args.ineq, ps, seconds)
    if cfg.format == "json":
        text = _json(
            [{"p": p, "alpha_or_d": x, "lhs": l, "bound": b, "violated": v} for p, x, l, b, v in rows]
        )
    else:
        text = _csv(
            [("p", "alpha_or_d", "lhs", "bound", "violated")]
            + [(repr(p), repr(x), repr(l), repr(b), _flag(v)) for p, x, l, b, v in rows]
        )
    _emit(text, cfg)
    return EXIT_OK


def cmd_simulate(args, cfg):
    if not 0.0 <= args.noise <= 1.0:
        raise CliError(f"--noise must lie in [0, 1], got {args.noise}")
    if args.shots < 1:
        raise CliError("--shots must be at least 1")
    est = {
        which: estimate_combo(args.shots, args.seed, args.noise, which, full_magnitude=args.full_magnitude)
        for which in ("eq12", "eq13")
    }
    if cfg.format == "csv":
        text = _csv([("which", "value", "stderr")] + [(w, repr(e.value), repr(e.stderr)) for w, e in est.items()])
    else:
        out = {w: e.to_dict() for w, e in est.items()}
        out.update({"shots": args.shots, "seed": args.seed, "noise": args.noise, "full_magnitude": args.full_magnitude})
        text = _json(out)
    _emit(text, cfg)
    return EXIT_OK


def cmd_selftest(args, cfg):
    s = _load_state(cfg)
    a = SelfTestAssumptions(load_basis(args.basis_a, s.dA), load_basis(args.basis_b, s.dB), args.epsilon)
    verdict = certify(s, a, tol=cfg.tolerance)
    _emit(_json(verdict.to_dict()), cfg)
    return EXIT_OK


def cmd_measure(args, cfg):
    s = _load_state(cfg)
    variant = MeasureVariant(args.variant)
    if variant is MeasureVariant.FIXED_BASIS:
        res = n_measure(s, variant, load_basis(args.basis_a, s.dA), load_basis(args.basis_b, s.dB))
    else:
        res = n_measure(s, variant, cfg=_opt_cfg(args))
    if cfg.format == "csv":
        text = _csv([("term", "value")] + [(",".join(map(str, k)), repr(v)) for k, v in sorted(res.per_term.items())])
    else:
        text = _json(res.to_dict())
    _emit(text, cfg)
    return EXIT_VIOLATED if res.value > VIOLATION_SLACK else EXIT_OK


def cmd_probe(args, cfg):
    if args.trials < 1:
        raise CliError("--trials must be at least 1")
    if args.which == "axiom-b":
        rep = axiom_b_trials(args.seed, args.trials, args.channel, args.d)
    elif args.which == "axiom-c":
        rep = axiom_c_trials(args.seed, args.trials, args.d)
    else:
        opt = OptimizerConfig(restarts=args.restarts or 2, max_evals=300, seed=args.seed)
        rep = theorem1_probe(args.seed, args.trials, args.d, opt)
    if cfg.format == "json":
        text = _json(
            {
                "probe": rep.name,
                "violations": rep.violations,
                "min_slack": rep.min_slack,
                "rows": [
                    {"trial": r.trial, "slack": r.slack, "variant": r.variant, "channel_kind": r.channel_kind}
                    for r in rep.rows
                ],
            }
        )
    else:
        text = _csv(rep.to_csv_rows())
    _emit(text, cfg)
    return EXIT_VIOLATED if rep.violations else EXIT_OK


def cmd_thresholds(args, cfg):
    t = thresholds(args.d)
    if cfg.format == "csv":
        text = _csv([("d", "entangled", "steerable", "slhs"), (t.d, repr(t.entangled), repr(t.steerable), repr(t.slhs))])
    else:
        text = _json({"d": t.d, "entangled": t.entangled, "steerable": t.steerable, "slhs": t.slhs})
    _emit(text, cfg)
    return EXIT_OK


def cmd_oracle(args, cfg):
    if args.which == "eq8-max":
        res = bound_oracle(args.d, OptimizerConfig(restarts=args.restarts or 8, seed=args.seed))
        out = {
            "which": args.which,
            "d": res.d,
            "value": res.value,
            "target": res.target,
            "transitions_a": res.transitionsA.tolist(),
            "transitions_b": res.transitionsB.tolist(),
        }
    else:
        res = adversarial_search(
            args.epsilon, args.d, args.d, OptimizerConfig(restarts=args.restarts or 32, max_evals=4000, seed=args.seed)
        )
        out = {
            "which": args.which,
            "epsilon": args.epsilon,
            "infidelity": res.infidelity,
            "max_residual": res.max_residual,
            "feasible": res.feasible,
            "converged": res.converged,
        }
    _emit(_json(out), cfg)
    return EXIT_OK


def cmd_state(args, cfg):
    fam = args.family
    if fam in ("phi+", "phi-", "psi+", "psi-"):
        s = BipartiteState(2, 2, DensityMatrix(bell(fam).projector()))
    elif fam == "mixed":
        d = args.d or 2
        s = BipartiteState(d, d, DensityMatrix(np.eye(d * d) / d**2))
    elif fam in ("werner-phi", "werner-psi"):
        kind = "phi_plus" if fam == "werner-phi" else "psi_plus"
        s = werner(WernerSpec(args.p, args.alpha, kind))
    elif fam == "isotropic":
        s = isotropic(IsotropicSpec(args.d or 3, args.p))
    elif fam == "separable":
        s = random_separable(args.seed, args.terms, args.d or 2, args.d or 2)
    else:
        s = lhs_assemblage_state(args.seed, args.terms, args.d or 2)
    _emit(dumps_state(s) + "\n", cfg)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--tolerance", type=float, default=1e-9)

    bases = argparse.ArgumentParser(add_help=False)
    bases.add_argument("--basis-a", default="z", help="z, x, y, or a unitary JSON file")
    bases.add_argument("--basis-b", default="z", help="z, x, y, or a unitary JSON file")

    p = _Parser(prog="slhs", description="Transition-amplitude nonlocality toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common, bases], help="evaluate one inequality")
    e.add_argument("--state", required=True)
    e.add_argument("--ineq", choices=[k.value for k in KINDS], default="aligned")
    e.add_argument("--optimize", action="store_true", help="search the local bases")
    e.add_argument("--restarts", type=int, default=None)

    s = sub.add_parser("sweep", parents=[common], help="family sweep at the computational bases")
    s.add_argument("--family", choices=("werner-phi", "werner-psi", "isotropic"), required=True)
    s.add_argument("--ineq", choices=[k.value for k in KINDS], default="aligned")
    s.add_argument("--p-min", type=float, default=0.0)
    s.add_argument("--p-max", type=float, default=1.0)
    s.add_argument("--p-steps", type=int, default=101)
    s.add_argument("--alpha", type=float, nargs="+", default=None)
    s.add_argument("--alpha-steps", type=int, default=None)
    s.add_argument("--d", type=int, nargs="+", default=None)

    m = sub.add_parser("simulate", parents=[common], help="simulated measurement protocol")
    m.add_argument("--shots", type=int, default=8192)
    m.add_argument("--noise", type=float, default=0.0)
    m.add_argument("--full-magnitude", action="store_true")

    t = sub.add_parser("selftest", parents=[common, bases], help="certify the Bell state")
    t.add_argument("--state", required=True)
    t.add_argument("--epsilon", type=float, default=1e-9)

    n = sub.add_parser("measure", parents=[common, bases], help="nonlocality measure")
    n.add_argument("--state", required=True)
    n.add_argument("--variant", choices=[v.value for v in MeasureVariant], default="fixed_basis")
    n.add_argument("--restarts", type=int, default=None)

    r = sub.add_parser("probe", parents=[common], help="axiom and channel probes")
    r.add_argument("--which", choices=("axiom-b", "axiom-c", "theorem1"), required=True)
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--channel", choices=PROBE_CHANNELS, default="diagonal")
    r.add_argument("--d", type=int, default=2)
    r.add_argument("--restarts", type=int, default=None)

    h = sub.add_parser("thresholds", parents=[common], help="isotropic thresholds")
    h.add_argument("--d", type=int, required=True)

    o = sub.add_parser("oracle", parents=[common], help="bound and self-test oracles")
    o.add_argument("--which", choices=("eq8-max", "selftest"), required=True)
    o.add_argument("--d", type=int, default=2)
    o.add_argument("--epsilon", type=float, default=0.0)
    o.add_argument("--restarts", type=int, default=None)

    w = sub.add_parser("state", parents=[common], help="write a state file")
    w.add_argument(
        "--family",
        choices=("phi+", "phi-", "psi+", "psi-", "mixed", "werner-phi", "werner-psi", "isotropic", "separable", "assemblage"),
        required=True,
    )
    w.add_argument("--p", type=float, default=1.0)
    w.add_argument("--alpha", type=float, default=0.5)
    w.add_argument("--d", type=int, default=None)
    w.add_argument("--terms", type=int, default=4)
    return p


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
    "measure": cmd_measure,
    "probe": cmd_probe,
    "thresholds": cmd_thresholds,
    "oracle": cmd_oracle,
    "state": cmd_state,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"slhs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
