"""Command-line client.

By default subcommands run the analysis in-process through the same handlers
the HTTP service uses; pass --server to talk to a running service instead.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    AnalysisConfig,
    emit_report,
    report_dict,
    run_analysis,
    run_sensitivity,
)
from .csvio import parse_csv
from .errors import ConvergenceError, DataError, MetaError, SpecError
from .svgplot import freq_curve_for, render_density_svg


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise SpecError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meta",
                     description="Random-effects meta-analysis: exact Bayesian "
                                 "normal-mixture posteriors next to the frequentist classics.")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze one CSV dataset")
    _add_common_flags(analyze)
    analyze.add_argument("--tau-prior", default="half-normal:0.5",
                         help="heterogeneity prior, e.g. half-normal:0.5, uniform:2, fixed:0")
    analyze.add_argument("--plot", metavar="PATH", default=None,
                         help="write an SVG density comparison to PATH")
    analyze.set_defaults(func=cmd_analyze)

    sens = sub.add_parser("sensitivity", help="repeat the analysis under several tau priors")
    _add_common_flags(sens)
    sens.add_argument("--tau-priors", required=True,
                      help="comma-separated heterogeneity prior specs")
    sens.set_defaults(func=cmd_sensitivity)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("csv", help="input CSV (study,y,se or study,events_t,n_t,events_c,n_c)")
    sub.add_argument("--mu-prior", default="uniform",
                     help="effect prior: uniform or normal:<mean>,<sd>")
    sub.add_argument("--level", type=float, default=0.95)
    sub.add_argument("--interval", choices=("shortest", "central"), default="shortest")
    sub.add_argument("--methods", default="bayes",
                     help="comma-separated subset of bayes,common,dl,reml,hksj")
    sub.add_argument("--subset", metavar="last:N", default=None,
                     help="analyze only the last N studies")
    sub.add_argument("--format", choices=("json", "text"), default="json")
    sub.add_argument("--server", metavar="URL", default=None,
                     help="send the request to a running service instead of computing locally")


def _parse_subset(text: str | None) -> int | None:
    if text is None:
        return None
    head, sep, num = text.partition(":")
    if head != "last" or not sep:
        raise SpecError(f"subset must look like last:N, got {text!r}")
    try:
        return int(num)
    except ValueError:
        raise SpecError(f"subset must look like last:N, got {text!r}") from None


def _config_from_args(args: argparse.Namespace, tau_prior: str) -> AnalysisConfig:
    return AnalysisConfig(
        tau_prior_spec=tau_prior,
        effect_prior_spec=args.mu_prior,
        level=args.level,
        interval_kind=args.interval,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        subset_last=_parse_subset(args.subset),
        plot_path=getattr(args, "plot", None),
        output_format=args.format,
    )


def _config_payload(cfg: AnalysisConfig) -> dict:
    return {
        "tau_prior": cfg.tau_prior_spec,
        "mu_prior": cfg.effect_prior_spec,
        "level": cfg.level,
        "interval": cfg.interval_kind,
        "methods": list(cfg.methods),
        "subset_last": cfg.subset_last,
    }


def _post(server: str, endpoint: str, payload: dict):
    import httpx

    resp = httpx.post(server.rstrip("/") + endpoint, json=payload, timeout=600.0)
    if resp.status_code != 200:
        try:
            err = resp.json()["error"]
            kind, message = err["kind"], err["message"]
        except Exception:
            kind, message = "HTTPError", resp.text.strip()[:200]
        exc_cls = {"SpecError": SpecError, "DataError": DataError,
                   "ConvergenceError": ConvergenceError}.get(kind, MetaError)
        raise exc_cls(message)
    return resp


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args, args.tau_prior)
    if args.server:
        csv_text = _read_csv_text(args.csv)
        payload = {"csv_text": csv_text, "config": _config_payload(cfg)}
        body = _post(args.server, "/analyze", payload).json()
        if cfg.plot_path:
            svg = _post(args.server, "/plot", payload).text
            _write_file(cfg.plot_path, svg)
        print(json.dumps(body, indent=2))
        return 0
    dataset = parse_csv(args.csv)
    report = run_analysis(dataset, cfg, source=str(args.csv))
    if cfg.plot_path:
        if "bayes" not in cfg.methods:
            raise SpecError("--plot requires bayes among --methods")
        svg = render_density_svg(report, freq_curve_for(report, dataset))
        _write_file(cfg.plot_path, svg)
    print(emit_report(report))
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    specs = [s.strip() for s in args.tau_priors.split(",") if s.strip()]
    if not specs:
        raise SpecError("--tau-priors needs at least one spec")
    cfg = _config_from_args(args, specs[0])
    if args.server:
        payload = {"csv_text": _read_csv_text(args.csv),
                   "config": _config_payload(cfg), "tau_priors": specs}
        body = _post(args.server, "/sensitivity", payload).json()
        failed = [r for r in body["runs"] if r.get("error")]
        for r in failed:
            print(f"meta: error: usage: tau prior {r['tau_prior']!r}: {r['error']}",
                  file=sys.stderr)
        print(json.dumps([r["report"] for r in body["runs"] if r.get("report")], indent=2))
        return 1 if failed else 0
    dataset = parse_csv(args.csv)
    runs = run_sensitivity(dataset, cfg, specs, source=str(args.csv))
    failed = [r for r in runs if r.error is not None]
    for r in failed:
        print(f"meta: error: usage: tau prior {r.tau_prior_spec!r}: {r.error}", file=sys.stderr)
    if cfg.output_format == "text":
        print("\n\n".join(emit_report(r.report) for r in runs if r.report is not None))
    else:
        print(json.dumps([report_dict(r.report) for r in runs if r.report is not None],
                         indent=2))
    return 1 if failed else 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("metamix.service.app:app", host=args.host, port=args.port)
    return 0


def _read_csv_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_file(path: str, content: str) -> None:
    try:
        Path(path).write_text(content, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SpecError as exc:
        print(f"meta: error: usage: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"meta: error: usage: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"meta: error: data: {exc}", file=sys.stderr)
        return 2
    except MetaError as exc:
        print(f"meta: error: numeric: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
