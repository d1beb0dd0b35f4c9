"""Command-line front end.

Commands::

    bigframe analyze FILE            classification report
    bigframe bounds FILE             optimal constants only
    bigframe verify TAG              randomized property suite
    bigframe generate ...            random fixture
    bigframe example {3.4,3.6}       fixed fixtures
    bigframe transform FILE --op OP  transformed system

Exit codes: 0 success, 1 suite failure or other error, 2 usage error,
3 parse error. Diagnostics go to stderr, one line, prefixed ``error:``.
"""

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import instances, suites, transforms
from .core import ClassificationReport, classify
from .errors import BigFrameError, ParseError
from .opkit import DEFAULT_TOL, SpectralTolerance
from .stability import StabilityCertificate
from .suites import SuiteResult

COMMANDS = ("analyze", "bounds", "verify", "generate", "transform", "example")
OPS = ("swap", "right-compose", "positive-perturb", "restrict-range")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    input_path: Optional[str] = None
    tol: SpectralTolerance = DEFAULT_TOL
    seed: int = 0
    instances: int = 200
    theorem_id: Optional[str] = None
    output_path: Optional[str] = None
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command == "verify":
            if self.theorem_id is None:
                raise UsageError("verify requires a theorem tag")
            if self.theorem_id not in suites.TAGS:
                raise UsageError(f"unknown theorem tag {self.theorem_id!r}; "
                                 f"choose from {', '.join(suites.TAGS)}")
        if self.command in ("analyze", "bounds", "transform") and not self.input_path:
            raise UsageError(f"{self.command} requires an input file")
        if self.instances < 1:
            raise UsageError("--instances must be positive")


@dataclass
class CliResult:
    code: int
    stdout: str = ""
    stderr: str = ""


# ---------------------------------------------------------------- reporting

def fmt(v):
    """12 significant digits; booleans and enums as lowercase words."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def _block(pairs):
    return "".join(f"{k}={fmt(v)}\n" for k, v in pairs)


def _report_pairs(rep):
    return [("classification", rep.verdict), ("A_opt", rep.a_opt), ("B_opt", rep.b_opt),
            ("hermiticity_residual", rep.hermiticity_residual),
            ("min_eigenvalue", rep.min_eigenvalue), ("tight_residual", rep.tight_residual),
            ("k_rank", rep.k_rank), ("degenerate_k", rep.degenerate_k)]


def emit_report(report, machine=True):
    """Deterministic text for a classification report, a stability
    certificate or a suite summary.

    The human part comes first; with ``machine`` a ``key=value`` block in fixed
    key order follows.
    """
    if isinstance(report, ClassificationReport):
        human = [f"verdict: {report.verdict.value}"]
        if report.optimal_bounds is not None:
            human.append(f"optimal bounds: A = {fmt(report.a_opt)}, B = {fmt(report.b_opt)}")
        else:
            human.append("no finite positive lower bound against K*")
        human += [f"note: {r}" for r in report.remarks]
        pairs = _report_pairs(report)
    elif isinstance(report, StabilityCertificate):
        human = [f"stability verdict: {fmt(report.verdict)}",
                 f"subset policy: {report.policy_used.mode}",
                 f"note: {report.paper_lower_note}"]
        ach = report.achieved
        pairs = [("verdict", report.verdict), ("hypothesis_margin", report.hypothesis_margin),
                 ("predicted_lower", report.predicted.lower),
                 ("predicted_upper", report.predicted.upper),
                 ("achieved_lower", ach.lower if ach else float("nan")),
                 ("achieved_upper", ach.upper if ach else float("nan")),
                 ("candidate_classification", report.candidate_verdict or "none"),
                 ("lower_holds", report.lower_holds if report.lower_holds is not None else "none")]
    elif isinstance(report, SuiteResult):
        human = [f"suite {report.theorem}: {report.passed}/{report.instances} passed "
                 f"(seed {report.seed})"]
        failing = report.failing
        pairs = [("theorem", report.theorem), ("seed", report.seed),
                 ("instances", report.instances), ("passed", report.passed),
                 ("failed", report.failed), ("worst_margin", report.worst_margin),
                 ("failing_indices", ",".join(str(i) for i in failing)),
                 ("failing_seeds", ",".join(str(suites.instance_seed(report.seed, i))
                                            for i in failing))]
        pairs += [(f"count_{k}", v) for k, v in report.counters().items()]
    else:
        raise TypeError(f"cannot report on {type(report).__name__}")
    text = "".join(line + "\n" for line in human)
    if machine:
        text += _block(pairs)
    return text


def suite_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "instance_seed", "ok", "margin", "note"])
    for i, t in enumerate(result.trials):
        w.writerow([i, suites.instance_seed(result.seed, i), fmt(t.ok), fmt(t.margin), t.note])
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _load_system(path):
    return instances.deserialize(_read(path))


def _load_matrix(path):
    if path is None:
        raise UsageError("this transform needs --operand FILE")
    return instances.deserialize_matrix(_read(path))


def _write(cfg, data):
    """Write bytes to the output path, or return them as stdout text."""
    if cfg.output_path:
        with open(cfg.output_path, "wb") as fh:
            fh.write(data)
        return f"wrote {cfg.output_path}\n"
    return data.decode("utf-8")


def _cmd_analyze(cfg):
    rep = classify(_load_system(cfg.input_path), cfg.tol)
    return CliResult(EXIT_OK, emit_report(rep))


def _cmd_bounds(cfg):
    rep = classify(_load_system(cfg.input_path), cfg.tol)
    return CliResult(EXIT_OK, _block([("A_opt", rep.a_opt), ("B_opt", rep.b_opt)]))


def _cmd_verify(cfg):
    res = suites.run_suite(cfg.theorem_id, cfg.instances, cfg.seed)
    out = emit_report(res)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(suite_csv(res))
    return CliResult(EXIT_OK if res.failed == 0 else EXIT_FAIL, out)


def _cmd_generate(cfg):
    o = cfg.options
    spec = instances.GeneratorSpec(o["dim"], o["count"], o["kind"], cfg.seed, o.get("k_rank"))
    return CliResult(EXIT_OK, _write(cfg, instances.serialize(instances.random_system(spec))))


def _cmd_example(cfg):
    which = cfg.options["which"]
    sys_ = instances.example_3_4() if which == "3.4" else instances.example_3_6()
    return CliResult(EXIT_OK, _write(cfg, instances.serialize(sys_)))


def _cmd_transform(cfg):
    system = _load_system(cfg.input_path)
    op = cfg.options["op"]
    pred = None
    if op == "swap":
        out = transforms.swap(system)
    elif op == "right-compose":
        out, pred = transforms.right_compose(system, _load_matrix(cfg.options.get("operand")),
                                             cfg.tol)
    elif op == "positive-perturb":
        out = transforms.positive_perturb(system, _load_matrix(cfg.options.get("operand")),
                                          cfg.options.get("power", 1), cfg.tol)
    else:
        out, pred = transforms.restrict_range(system, _load_matrix(cfg.options.get("operand")),
                                              cfg.tol)
    text = _write(cfg, instances.serialize(out))
    if cfg.output_path and pred is not None:
        text += _block([("predicted_lower", pred.lower), ("predicted_upper", pred.upper)])
    return CliResult(EXIT_OK, text)


HANDLERS = {"analyze": _cmd_analyze, "bounds": _cmd_bounds, "verify": _cmd_verify,
            "generate": _cmd_generate, "example": _cmd_example, "transform": _cmd_transform}


def run(cfg):
    """Execute a validated configuration; never raises."""
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        return CliResult(EXIT_USAGE, stderr=f"error: usage: {exc}\n")
    except ParseError as exc:
        return CliResult(EXIT_PARSE, stderr=f"error: parse: {exc}\n")
    except BigFrameError as exc:
        return CliResult(EXIT_FAIL, stderr=f"error: {type(exc).__name__}: {exc}\n")
    except OSError as exc:
        return CliResult(EXIT_FAIL, stderr=f"error: io: {exc.strerror}: {exc.filename}\n")


# ---------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_tol(p):
    g = p.add_argument_group("tolerances")
    g.add_argument("--rank-tol", type=float, help="relative rank cutoff")
    g.add_argument("--sym-tol", type=float, help="relative Hermiticity/tightness tolerance")
    g.add_argument("--psd-tol", type=float, help="relative PSD / K-frame threshold")
    g.add_argument("--range-tol", type=float, help="relative range-inclusion tolerance")


def build_parser():
    p = _Parser(prog="bigframe", description="Analyze and verify K-bi-g-frames.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    for name in ("analyze", "bounds"):
        sp = sub.add_parser(name)
        sp.add_argument("input")
        _add_tol(sp)

    sp = sub.add_parser("verify")
    sp.add_argument("theorem")
    sp.add_argument("--instances", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", "-o", help="CSV file of per-instance margins")

    sp = sub.add_parser("generate")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--kind", choices=instances.KINDS, default="generic")
    sp.add_argument("--k-rank", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", "-o")

    sp = sub.add_parser("example")
    sp.add_argument("which", choices=("3.4", "3.6"))
    sp.add_argument("--out", "-o")

    sp = sub.add_parser("transform")
    sp.add_argument("input")
    sp.add_argument("--op", choices=OPS, required=True)
    sp.add_argument("--operand", help="matrix file (right-compose, positive-perturb, restrict-range)")
    sp.add_argument("--power", type=int, default=1)
    sp.add_argument("--out", "-o")
    _add_tol(sp)
    return p


def _base_tol(environ):
    raw = environ.get("BIGFRAME_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        v = float(raw)
    except ValueError:
        raise UsageError(f"BIGFRAME_TOL is not a decimal: {raw!r}") from None
    return SpectralTolerance(rel_sym_tol=v, rel_psd_tol=v)


def parse_args(argv, environ=None):
    """Turn argv into a :class:`CliConfig`; raises :class:`UsageError`."""
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    tol = _base_tol(os.environ if environ is None else environ)
    over = {}
    for arg, name in (("rank_tol", "rel_rank_tol"), ("sym_tol", "rel_sym_tol"),
                      ("psd_tol", "rel_psd_tol"), ("range_tol", "rel_range_tol")):
        if getattr(ns, arg, None) is not None:
            over[name] = getattr(ns, arg)
    if over:
        try:
            tol = SpectralTolerance(**{**tol.__dict__, **over})
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cfg = CliConfig(ns.command, getattr(ns, "input", None), tol,
                    seed=getattr(ns, "seed", 0), instances=getattr(ns, "instances", 200),
                    theorem_id=getattr(ns, "theorem", None), output_path=getattr(ns, "out", None))
    if ns.command == "generate":
        if not 1 <= ns.dim <= instances.MAX_DIM or ns.count < 1:
            raise UsageError(f"--dim must be in 1..{instances.MAX_DIM} and --count positive")
        cfg.options = {"dim": ns.dim, "count": ns.count, "kind": ns.kind, "k_rank": ns.k_rank}
    elif ns.command == "example":
        cfg.options = {"which": ns.which}
    elif ns.command == "transform":
        if ns.power < 1:
            raise UsageError("--power must be positive")
        if ns.op != "swap" and ns.operand is None:
            raise UsageError(f"--op {ns.op} needs --operand FILE")
        cfg.options = {"op": ns.op, "operand": ns.operand, "power": ns.power}
    return cfg


def main(argv=None, environ=None):
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv, environ)
    except UsageError as exc:
        sys.stderr.write(f"error: usage: {exc}\n")
        return EXIT_USAGE
    res = run(cfg)
    sys.stdout.write(res.stdout)
    sys.stderr.write(res.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
