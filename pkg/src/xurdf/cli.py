"""Command line front end: argument parsing and rendering over the shared
command handlers. All analysis logic lives in xurdf.service.handlers; this
module only reads files, parses flags and prints.

Exit codes: 0 success (possibly with warnings), 1 unparseable input,
2 unsound model or bad request, 3 numerical failure.

Set XURDF_LOG to error, warn, info or debug to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .errors import ConfigurationError, XurdfError
from .service import handlers
from .service.handlers import EXIT_INPUT, EXIT_MODEL, HandlerResult, make_report

log = logging.getLogger("xurdf.cli")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> None:
    name = os.environ.get("XURDF_LOG", "warn").strip().lower()
    if name not in _LOG_LEVELS:
        logging.basicConfig(level=logging.WARNING)
        log.warning("unknown XURDF_LOG value %r, using warn", name)
        return
    logging.basicConfig(level=_LOG_LEVELS[name],
                        format="%(levelname)s %(name)s: %(message)s")


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _atomic_write(path: str, text: str) -> None:
    """Write through a temporary file so readers never see a partial file."""
    target = Path(path)
    parent = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=str(parent), prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _parse_configuration(text: str | None) -> list[float] | None:
    """Accept either an inline JSON array or a path to a file holding one."""
    if text is None:
        return None
    if not text.lstrip().startswith("["):
        text = _read_text(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"configuration is not valid JSON: {exc}", code="BadValue")
    if not isinstance(data, list):
        raise ConfigurationError(
            "configuration must be a JSON array of numbers", code="BadShape")
    try:
        return [float(x) for x in data]
    except (TypeError, ValueError):
        raise ConfigurationError(
            "configuration array contains non-numeric entries", code="BadValue")


def _guarded(command: str, fn):
    """Turn I/O and argument errors into reports instead of tracebacks."""

    def run(args: argparse.Namespace) -> HandlerResult:
        try:
            return fn(args)
        except OSError as exc:
            payload = {"error": {
                "code": "IoError",
                "subject": getattr(exc, "filename", None),
                "message": str(exc),
            }}
            return HandlerResult(make_report(command, "error", payload), EXIT_INPUT)
        except XurdfError as exc:
            code = handlers.classify_error(exc)
            payload = {"error": handlers.error_payload(exc)}
            return HandlerResult(make_report(command, "error", payload), code)

    return run


def _model_inputs(args: argparse.Namespace) -> tuple[str, str | None]:
    urdf_text = _read_text(args.urdf)
    extension_text = _read_text(args.yaml) if args.yaml is not None else None
    return urdf_text, extension_text


def _cmd_validate(args: argparse.Namespace) -> HandlerResult:
    urdf_text, extension_text = _model_inputs(args)
    return handlers.handle_validate(
        urdf_text, extension_text,
        floating_base=args.floating_base,
        auto_spherical=not args.no_auto_spherical)


def _cmd_info(args: argparse.Namespace) -> HandlerResult:
    urdf_text, extension_text = _model_inputs(args)
    return handlers.handle_info(
        urdf_text, extension_text,
        floating_base=args.floating_base,
        auto_spherical=not args.no_auto_spherical,
        configuration=_parse_configuration(args.config),
        layout=args.layout)


def _cmd_check(args: argparse.Namespace) -> HandlerResult:
    urdf_text, extension_text = _model_inputs(args)
    return handlers.handle_check(
        urdf_text, extension_text,
        floating_base=args.floating_base,
        auto_spherical=not args.no_auto_spherical,
        configuration=_parse_configuration(args.config))


def _cmd_gen_yaml(args: argparse.Namespace) -> HandlerResult:
    urdf_text = _read_text(args.urdf)
    result = handlers.handle_gen_yaml(
        urdf_text,
        closure_pattern=args.closure_pattern,
        actuated_pattern=args.actuated_pattern)
    if result.exit_code == 0 and args.out is not None:
        _atomic_write(args.out, result.report["payload"]["yaml"])
        result.report["payload"]["written_to"] = args.out
    return result


def _cmd_project(args: argparse.Namespace) -> HandlerResult:
    urdf_text, extension_text = _model_inputs(args)
    result = handlers.handle_project(
        urdf_text, extension_text,
        floating_base=args.floating_base,
        auto_spherical=not args.no_auto_spherical,
        configuration=_parse_configuration(args.config_in),
        tol=args.tol,
        max_iterations=args.max_iterations)
    if result.exit_code == 0 and args.config_out is not None:
        text = json.dumps(result.report["payload"]["configuration"]) + "\n"
        _atomic_write(args.config_out, text)
        result.report["payload"]["written_to"] = args.config_out
    return result


def _render_error(payload: dict, out: list[str]) -> None:
    err = payload["error"]
    subject = f" [{err['subject']}]" if err.get("subject") else ""
    out.append(f"error {err['code']}{subject}: {err['message']}")


def _render_findings(payload: dict, out: list[str]) -> None:
    for f in payload.get("findings", ()):
        out.append(f"{f['severity']:>7} {f['code']} [{f['subject']}]: {f['message']}")
    summary = payload.get("summary")
    if summary is not None:
        out.append(f"errors: {summary['errors']}, warnings: {summary['warnings']}")
    if "note" in payload:
        out.append(payload["note"])


def _render_closures(payload: dict, out: list[str]) -> None:
    for c in payload.get("closures", ()):
        out.append(f"closure {c['name']} ({c['type']}, {c['rows']} rows): "
                   f"residual {c['residual_norm']:.3e}")


def _render_report_block(payload: dict, out: list[str]) -> None:
    rep = payload["report"]
    out.append(f"model: {payload['model']}")
    out.append(f"n_q: {rep['n_q']}, n_v: {rep['n_v']}")
    out.append(f"constraint rows: {rep['constraint_rows']}, rank: {rep['rank']}")
    out.append(f"actuated: {rep['n_actuated']}, "
               f"internal mobilities: {rep['internal_mobilities']}, "
               f"net dof: {rep['net_dof']}")
    out.append(f"residual inf-norm: {rep['residual_inf']:.3e} "
               f"({payload['configuration_source']})")
    for w in rep.get("warnings", ()):
        out.append(f"warning {w['code']} [{w['subject']}]: {w['message']}")


def _render_layout(payload: dict, out: list[str]) -> None:
    out.append("layout:")
    for row in payload["layout"]:
        tag = " actuated" if row["actuated"] else ""
        out.append(f"  q[{row['q_offset']}:{row['q_offset'] + row['nq']}] "
                   f"v[{row['v_offset']}:{row['v_offset'] + row['nv']}] "
                   f"{row['kind']:<10} {row['joint']}{tag}")


def _render_text(report: dict) -> str:
    command = report["command"]
    payload = report["payload"]
    out: list[str] = []
    if "error" in payload:
        _render_error(payload, out)
    if command == "validate":
        _render_findings(payload, out)
    elif command == "info":
        if "report" in payload:
            _render_report_block(payload, out)
            _render_closures(payload, out)
        if "layout" in payload:
            _render_layout(payload, out)
    elif command == "check":
        _render_closures(payload, out)
        if "max_residual" in payload:
            out.append(f"max residual: {payload['max_residual']:.3e}")
    elif command == "project":
        if "iterations" in payload:
            out.append(f"iterations: {payload['iterations']}")
        if "final_norm" in payload:
            out.append(f"final residual inf-norm: {payload['final_norm']:.3e}")
    elif command == "gen-yaml":
        if "written_to" in payload:
            out.append(f"wrote {payload['written_to']} "
                       f"({payload['closures']} closures, "
                       f"{payload['actuated']} actuated joints)")
        elif "yaml" in payload:
            out.append(payload["yaml"].rstrip("\n"))
    for w in payload.get("warnings", ()):
        if isinstance(w, str):
            out.append(f"warning: {w}")
    if "written_to" in payload and command != "gen-yaml":
        out.append(f"wrote {payload['written_to']}")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xurdf",
        description="Closed-loop analysis of URDF models with a YAML "
                    "closure and actuation extension.")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="print the full report as JSON")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("urdf", help="path to the URDF file")
    model.add_argument("yaml", nargs="?", default=None,
                       help="path to the extension YAML (optional)")
    model.add_argument("--floating-base", action="store_true",
                       help="mount the root body on a free 6-DoF joint")
    model.add_argument("--no-auto-spherical", action="store_true",
                       help="only apply replacements named in the YAML, "
                            "do not fuse detected revolute triples")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common, model],
                       help="parse, build and report soundness findings")
    p.set_defaults(run=_guarded("validate", _cmd_validate))

    p = sub.add_parser("info", parents=[common, model],
                       help="mobility counts and closure residuals")
    p.add_argument("--config", default=None, metavar="JSON_OR_PATH",
                   help="configuration of length n_q, inline JSON array or "
                        "a path to a file holding one; the projected "
                        "neutral configuration when omitted")
    p.add_argument("--layout", action="store_true",
                   help="include the per-joint q/v layout table")
    p.set_defaults(run=_guarded("info", _cmd_info))

    p = sub.add_parser("check", parents=[common, model],
                       help="closure residual norms only")
    p.add_argument("--config", default=None, metavar="JSON_OR_PATH",
                   help="configuration of length n_q, inline JSON array or "
                        "a path to a file holding one")
    p.set_defaults(run=_guarded("check", _cmd_check))

    p = sub.add_parser("gen-yaml", parents=[common],
                       help="recover the extension YAML from naming conventions")
    p.add_argument("urdf", help="path to the URDF file")
    p.add_argument("--closure-pattern", default=None, metavar="REGEX",
                   help="link-name regex with named groups type, id, endpoint")
    p.add_argument("--actuated-pattern", default=None, metavar="REGEX",
                   help="joint-name regex selecting actuated joints")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write the YAML here instead of stdout")
    p.set_defaults(run=_guarded("gen-yaml", _cmd_gen_yaml))

    p = sub.add_parser("project", parents=[common, model],
                       help="pull a configuration onto the closure manifold")
    p.add_argument("--config-in", default=None, metavar="JSON_OR_PATH",
                   help="starting configuration of length n_q, inline JSON "
                        "array or a path to a file holding one; neutral "
                        "when omitted")
    p.add_argument("--config-out", default=None, metavar="PATH",
                   help="write the projected configuration here as JSON")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="residual inf-norm target (default 1e-8)")
    p.add_argument("--max-iterations", type=int, default=100,
                   help="iteration budget (default 100)")
    p.set_defaults(run=_guarded("project", _cmd_project))

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    result: HandlerResult = args.run(args)
    log.info("command %s finished with status %s",
             result.report["command"], result.report["status"])
    if args.json:
        print(json.dumps(result.report, indent=2))
    else:
        text = _render_text(result.report)
        if text:
            stream = sys.stderr if result.exit_code else sys.stdout
            print(text, file=stream)
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
