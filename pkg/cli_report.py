"""
Command-line front end for the newtoncert certifier.

Usage: python cli_report.py <subcommand> <problem.toml> [options]

Subcommands: newton, faces, nondeg, ndci, certify-product, certify-family,
certify-pair, scan. JSON documents go to stdout (or --out), a one-line human
summary goes to stderr.

Exit codes: 0 pass / certificate issued, 1 hypotheses fail, 2 input error,
3 resource exhausted.
"""

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import settings
from certifier import (
    Certificate,
    CertificateStatus,
    FamilyInput,
    HypothesisInputError,
    Verdict,
    VerdictStatus,
    certify_hypersurface,
    certify_pair,
    certify_stable_radius,
    check_family,
    check_ndci,
    inputs_digest,
)
from milnor_numeric import NoSurvivorsError, ScanConfig, transversality_scan
from newton_geom import compact_faces, faces_table, newton_vertices
from poly_core import Polynomial, PolynomialError, constant_term, parse_polynomial, product, to_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_EXHAUSTED = 3

MODES = ("single", "product", "family", "pair")
SUBCOMMANDS = ("newton", "faces", "nondeg", "ndci", "certify-product", "certify-family", "certify-pair", "scan")


class ProblemFileError(ValueError):
    """Malformed problem file; carries a file:line:col location."""

    def __init__(self, message: str, path: str, line: int = 1, col: int = 1):
        super().__init__(f"{path}:{line}:{col}: {message}")
        self.path = path
        self.line = line
        self.col = col


@dataclass
class ProblemFile:
    path: str
    n: int
    mode: str
    polynomials: List[Polynomial]
    pair_g: List[Polynomial] = field(default_factory=list)
    scan: dict = field(default_factory=dict)
    expected_exit: dict = field(default_factory=dict)


# ============================================================================
# PROBLEM FILES
# ============================================================================

def _line_col(raw: str, offset: int) -> Tuple[int, int]:
    line = raw.count("\n", 0, offset) + 1
    col = offset - (raw.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _locate(raw: str, key: str) -> int:
    """Offset of the line assigning `key`, or 0."""
    m = re.search(rf"^[ \t]*{re.escape(key)}[ \t]*=", raw, re.MULTILINE)
    return m.start() if m else 0


def _parse_list(raw: str, path: str, key: str, texts, n: int, allow_t: bool) -> List[Polynomial]:
    if isinstance(texts, str):
        texts = [texts]
    if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
        line, col = _line_col(raw, _locate(raw, key))
        raise ProblemFileError(f"'{key}' must be a non-empty list of polynomial strings", path, line, col)
    key_at = _locate(raw, key)
    polys = []
    for text in texts:
        at = raw.find(text, key_at)
        try:
            f = parse_polynomial(text, n)
        except PolynomialError as e:
            offset = (at if at >= 0 else key_at) + (e.position or 0)
            line, col = _line_col(raw, offset)
            raise ProblemFileError(str(e), path, line, col) from e
        if f.is_parametric and not allow_t:
            line, col = _line_col(raw, at if at >= 0 else key_at)
            raise ProblemFileError("the parameter t may only occur in family members", path, line, col)
        polys.append(f)
    return polys


def load_problem(path) -> ProblemFile:
    """Read and validate a TOML problem file."""
    path = str(path)
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ProblemFileError(f"cannot read file: {e.strerror or e}", path) from e
    try:
        data = tomllib.loads(raw)
    except tomllib.TOMLDecodeError as e:
        m = re.search(r"line (\d+), column (\d+)", str(e))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (1, 1)
        raise ProblemFileError(f"invalid TOML: {e}", path, line, col) from e

    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= settings.MAX_VARIABLES:
        line, col = _line_col(raw, _locate(raw, "n"))
        raise ProblemFileError(f"'n' must be an integer in 1..{settings.MAX_VARIABLES}", path, line, col)
    mode = data.get("mode", "single")
    if mode not in MODES:
        line, col = _line_col(raw, _locate(raw, "mode"))
        raise ProblemFileError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}", path, line, col)

    problem = ProblemFile(path=path, n=n, mode=mode, polynomials=[])
    if mode == "pair":
        for key in ("f", "g"):
            if key not in data:
                raise ProblemFileError(f"pair mode needs a '{key}' list", path)
        problem.polynomials = _parse_list(raw, path, "f", data["f"], n, allow_t=False)
        problem.pair_g = _parse_list(raw, path, "g", data["g"], n, allow_t=False)
        if len(problem.polynomials) != len(problem.pair_g):
            line, col = _line_col(raw, _locate(raw, "g"))
            raise ProblemFileError("pair lists 'f' and 'g' must have equal length", path, line, col)
    else:
        if "polynomials" not in data:
            raise ProblemFileError("missing 'polynomials' list", path)
        problem.polynomials = _parse_list(raw, path, "polynomials", data["polynomials"], n,
                                          allow_t=mode == "family")
        if mode == "single" and len(problem.polynomials) != 1:
            line, col = _line_col(raw, _locate(raw, "polynomials"))
            raise ProblemFileError("single mode takes exactly one polynomial", path, line, col)

    scan = data.get("scan", {})
    if not isinstance(scan, dict):
        raise ProblemFileError("'scan' must be a table", path)
    problem.scan = scan
    expected = data.get("expected_exit", {})
    if not isinstance(expected, dict) or not all(isinstance(v, int) for v in expected.values()):
        line, col = _line_col(raw, max(raw.find("expected_exit"), 0))
        raise ProblemFileError("'expected_exit' must map subcommands to exit codes", path, line, col)
    problem.expected_exit = dict(expected)
    return problem


# ============================================================================
# DOCUMENTS
# ============================================================================

def build_document(kind: str, digest: str, payload_key: str, payload, annotations: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": settings.SCHEMA_VERSION,
        "tool_version": settings.TOOL_VERSION,
        "kind": kind,
        "inputs_digest": digest,
        payload_key: payload,
    }
    if annotations:
        doc["annotations"] = annotations
    return doc


def render_document(doc: dict) -> str:
    """Deterministic serialization: sorted keys, fixed indentation, ASCII only."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _certificate_exit(cert: Certificate) -> int:
    return {
        CertificateStatus.ISSUED: EXIT_OK,
        CertificateStatus.FAILED: EXIT_FAILED,
        CertificateStatus.EXHAUSTED: EXIT_EXHAUSTED,
    }[cert.status]


def _verdict_exit(verdict: Verdict) -> int:
    return {
        VerdictStatus.PASS: EXIT_OK,
        VerdictStatus.FAIL: EXIT_FAILED,
        VerdictStatus.EXHAUSTED: EXIT_EXHAUSTED,
    }[verdict.status]


def _summary_line(command: str, cert: Certificate) -> str:
    if cert.status == CertificateStatus.ISSUED:
        return f"✅ {command}: {cert.conclusion.value} ({len(cert.checks)} checks passed)"
    if cert.status == CertificateStatus.EXHAUSTED:
        return f"⚠️ {command}: resource exhausted, no conclusion"
    failing = next(v for v in cert.checks if v.status == VerdictStatus.FAIL)
    point = f", torus point {list(failing.witness_point)}" if failing.witness_point else ""
    return f"❌ {command}: {failing.check} failed: {failing.detail}{point}"


def _scan_config(problem: ProblemFile, args) -> ScanConfig:
    block = dict(problem.scan)
    for key in ("eps1", "eps2", "eta", "samples", "seed", "tolerance"):
        value = getattr(args, key, None)
        if value is not None:
            block[key] = value
    block.setdefault("seed", settings.DEFAULT_SEED)
    unknown = set(block) - {"eps1", "eps2", "eta", "samples", "seed", "tolerance"}
    if unknown:
        raise ProblemFileError(f"unknown scan keys: {', '.join(sorted(unknown))}", problem.path)
    try:
        return ScanConfig(**block)
    except (TypeError, ValueError) as e:
        raise ProblemFileError(f"bad scan settings: {e}", problem.path) from e


def _scan_target(problem: ProblemFile) -> Polynomial:
    f = product(problem.polynomials)
    if constant_term(f):
        raise ProblemFileError("scan needs a germ with f(0) = 0", problem.path)
    return f


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def _labelled(problem: ProblemFile) -> List[Tuple[str, Polynomial]]:
    if problem.mode == "pair":
        return ([(f"f{k}", f) for k, f in enumerate(problem.polynomials, start=1)] +
                [(f"g{k}", g) for k, g in enumerate(problem.pair_g, start=1)])
    return [(f"f{k}", f) for k, f in enumerate(problem.polynomials, start=1)]


def _require_mode(problem: ProblemFile, command: str, modes: Sequence[str]):
    if problem.mode not in modes:
        raise ProblemFileError(f"{command} needs mode {' or '.join(modes)}, file declares {problem.mode!r}",
                               problem.path)


def _cmd_newton(problem: ProblemFile, args) -> Tuple[str, str, int]:
    lines = []
    for label, f in _labelled(problem):
        verts = newton_vertices(f).vertices
        lines.append(f"{label} = {to_text(f)}")
        lines.append("  vertices: " + " ".join("(" + ",".join(map(str, v)) + ")" for v in verts))
    total = sum(len(newton_vertices(f).vertices) for _, f in _labelled(problem))
    return "\n".join(lines) + "\n", f"✅ newton: {total} vertices", EXIT_OK


def _cmd_faces(problem: ProblemFile, args) -> Tuple[str, str, int]:
    lines = []
    count = 0
    for label, f in _labelled(problem):
        faces = compact_faces(f)
        count += len(faces)
        lines.append(f"{label} = {to_text(f)}")
        lines.append(faces_table(faces).to_string(index=False))
    return "\n".join(lines) + "\n", f"✅ faces: {count} compact faces", EXIT_OK


def _cmd_nondeg(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "nondeg", ("single", "product"))
    f = product(problem.polynomials)
    cert = certify_hypersurface(f, args.jobs, args.step_budget)
    doc = build_document("certificate", cert.inputs_digest, "certificate", cert.to_dict())
    return render_document(doc), _summary_line("nondeg", cert), _certificate_exit(cert)


def _cmd_ndci(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "ndci", ("single", "product", "family"))
    verdict = check_ndci(problem.polynomials, args.jobs, args.step_budget)
    doc = build_document("verdict", inputs_digest("ndci", problem.polynomials), "verdict", verdict.to_dict())
    marker = {VerdictStatus.PASS: "✅", VerdictStatus.FAIL: "❌", VerdictStatus.EXHAUSTED: "⚠️"}[verdict.status]
    summary = f"{marker} ndci: {verdict.status.value} {verdict.detail}".rstrip()
    return render_document(doc), summary, _verdict_exit(verdict)


def _cmd_certify_product(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "certify-product", ("single", "product"))
    cert = certify_stable_radius(problem.polynomials, args.jobs, args.step_budget,
                                 audit_restrictions=args.audit_restrictions)
    annotations = {}
    if args.with_scan and cert.status == CertificateStatus.ISSUED:
        cfg = _scan_config(problem, args)
        try:
            report = transversality_scan(product(problem.polynomials), cfg, args.jobs)
            annotations["transversality_scan"] = {"config": cfg.to_dict(), "report": report.to_dict()}
        except NoSurvivorsError as e:
            annotations["transversality_scan"] = {"config": cfg.to_dict(), "no_survivors": e.discarded}
    doc = build_document("certificate", cert.inputs_digest, "certificate", cert.to_dict(), annotations)
    return render_document(doc), _summary_line("certify-product", cert), _certificate_exit(cert)


def _cmd_certify_family(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "certify-family", ("family",))
    family = FamilyInput.from_polynomials(problem.polynomials)
    cert = check_family(family, args.jobs, args.step_budget)
    doc = build_document("certificate", cert.inputs_digest, "certificate", cert.to_dict())
    return render_document(doc), _summary_line("certify-family", cert), _certificate_exit(cert)


def _cmd_certify_pair(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "certify-pair", ("pair",))
    cert = certify_pair(problem.polynomials, problem.pair_g, args.jobs, args.step_budget)
    doc = build_document("certificate", cert.inputs_digest, "certificate", cert.to_dict())
    return render_document(doc), _summary_line("certify-pair", cert), _certificate_exit(cert)


def _cmd_scan(problem: ProblemFile, args) -> Tuple[str, str, int]:
    _require_mode(problem, "scan", ("single", "product"))
    cfg = _scan_config(problem, args)
    f = _scan_target(problem)
    digest = inputs_digest("scan", [f])
    try:
        report = transversality_scan(f, cfg, args.jobs)
    except NoSurvivorsError as e:
        doc = build_document("report", digest, "report", None,
                             {"config": cfg.to_dict(), "no_survivors": e.discarded})
        return render_document(doc), f"❌ scan: {e}", EXIT_FAILED
    doc = build_document("report", digest, "report", report.to_dict(), {"config": cfg.to_dict()})
    marker = "⚠️" if report.below_tolerance else "✅"
    summary = (f"{marker} scan: min residual {report.min_residual:.3e} over {report.points_tested} points "
               f"({report.discarded} discarded)")
    return render_document(doc), summary, EXIT_OK


COMMANDS = {
    "newton": _cmd_newton,
    "faces": _cmd_faces,
    "nondeg": _cmd_nondeg,
    "ndci": _cmd_ndci,
    "certify-product": _cmd_certify_product,
    "certify-family": _cmd_certify_family,
    "certify-pair": _cmd_certify_pair,
    "scan": _cmd_scan,
}


# ============================================================================
# ENTRY POINTS
# ============================================================================

class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run_cli owns the exit code."""

    def error(self, message):
        raise ProblemFileError(message, self.prog)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="newtoncert", description="Exact Newton non-degeneracy certifier")
    parser.add_argument("command", choices=SUBCOMMANDS, help="what to compute")
    parser.add_argument("problem", help="TOML problem file")
    parser.add_argument("--out", help="write the output document here instead of stdout")
    parser.add_argument("--jobs", type=int, default=settings.DEFAULT_JOBS, help="worker threads")
    parser.add_argument("--step-budget", type=int, default=settings.STEP_BUDGET, help="Gröbner reduction steps")
    parser.add_argument("--seed", type=int, default=None, help="numeric scan seed")
    parser.add_argument("--eps1", type=float, default=None)
    parser.add_argument("--eps2", type=float, default=None)
    parser.add_argument("--eta", type=float, default=None)
    parser.add_argument("--samples", type=int, default=None)
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--audit-restrictions", action="store_true",
                        help="re-check every coordinate-subspace restriction (certify-product)")
    parser.add_argument("--with-scan", action="store_true",
                        help="attach a transversality scan annotation (certify-product)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def configure_logging(level: str = settings.LOG_LEVEL):
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def run_cli(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Run one subcommand; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(list(argv))
    except ProblemFileError as e:
        print(f"❌ usage error: {e}", file=stderr)
        return EXIT_INPUT
    configure_logging("DEBUG" if args.verbose else settings.LOG_LEVEL)
    if args.jobs < 1 or args.step_budget < 1:
        print("❌ --jobs and --step-budget must be positive", file=stderr)
        return EXIT_INPUT

    try:
        problem = load_problem(args.problem)
        output, summary, code = COMMANDS[args.command](problem, args)
    except (ProblemFileError, PolynomialError, HypothesisInputError) as e:
        print(f"❌ input error: {e}", file=stderr)
        return EXIT_INPUT

    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        stdout.write(output)
    print(summary, file=stderr)
    return code


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
