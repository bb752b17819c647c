"""Analysis orchestration: prior grammar, configuration, report assembly and
serialization (JSON with stable key order, or an aligned text table).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from . import bayes, freq, priors
from .data import Dataset, subset_last
from .errors import MetaError, SpecError
from .numerics import Interval

METHOD_ORDER = ("bayes", "common", "dl", "reml", "hksj")
TAU_ESTIMATOR_ORDER = ("dl", "reml", "hksj")
JSON_SIG_DIGITS = 6


def parse_tau_prior(spec: str) -> priors.HeterogeneityPrior:
    """Parse the heterogeneity-prior grammar.

    Forms: half-normal:<scale>, half-cauchy:<scale>, uniform:<upper>,
    log-normal:<mu>,<sd>, fixed:<value>.
    """
    name, args = _split_spec(spec)
    try:
        if name == "half-normal":
            return priors.HalfNormal(_one_arg(args, spec))
        if name == "half-cauchy":
            return priors.HalfCauchy(_one_arg(args, spec))
        if name == "uniform":
            return priors.Uniform(_one_arg(args, spec))
        if name == "log-normal":
            mu, sd = _two_args(args, spec)
            return priors.LogNormal(mu, sd)
        if name == "fixed":
            return priors.PointMass(_one_arg(args, spec))
    except MetaError as exc:
        raise SpecError(f"bad tau prior {spec!r}: {exc}") from None
    raise SpecError(f"unknown tau prior {spec!r}")


def parse_effect_prior(spec: str) -> priors.EffectPrior:
    """Parse the effect-prior grammar: uniform, or normal:<mean>,<sd>."""
    name, args = _split_spec(spec)
    if name == "uniform" and not args:
        return priors.ImproperUniform()
    if name == "normal":
        try:
            mean, sd = _two_args(args, spec)
            return priors.Normal(mean, sd)
        except MetaError as exc:
            raise SpecError(f"bad effect prior {spec!r}: {exc}") from None
    raise SpecError(f"unknown effect prior {spec!r}")


def format_tau_prior(prior: priors.HeterogeneityPrior) -> str:
    """Canonical spec string; parse_tau_prior(format_tau_prior(p)) == p."""
    if isinstance(prior, priors.HalfNormal):
        return f"half-normal:{prior.scale!r}"
    if isinstance(prior, priors.HalfCauchy):
        return f"half-cauchy:{prior.scale!r}"
    if isinstance(prior, priors.Uniform):
        return f"uniform:{prior.upper!r}"
    if isinstance(prior, priors.LogNormal):
        return f"log-normal:{prior.mu_log!r},{prior.sd_log!r}"
    return f"fixed:{prior.value!r}"


def format_effect_prior(prior: priors.EffectPrior) -> str:
    if isinstance(prior, priors.Normal):
        return f"normal:{prior.mean!r},{prior.sd!r}"
    return "uniform"


def _split_spec(spec: str) -> tuple[str, list[str]]:
    head, sep, rest = spec.strip().partition(":")
    args = [a.strip() for a in rest.split(",")] if sep else []
    return head.strip().lower(), args


def _num(text: str, spec: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SpecError(f"bad prior {spec!r}: non-numeric parameter {text!r}") from None


def _one_arg(args: list[str], spec: str) -> float:
    if len(args) != 1:
        raise SpecError(f"bad prior {spec!r}: expected one parameter")
    return _num(args[0], spec)


def _two_args(args: list[str], spec: str) -> tuple[float, float]:
    if len(args) != 2:
        raise SpecError(f"bad prior {spec!r}: expected two parameters")
    return _num(args[0], spec), _num(args[1], spec)


@dataclass(frozen=True)
class AnalysisConfig:
    tau_prior_spec: str = "half-normal:0.5"
    effect_prior_spec: str = "uniform"
    level: float = 0.95
    interval_kind: str = "shortest"
    methods: tuple[str, ...] = ("bayes",)
    subset_last: Optional[int] = None
    plot_path: Optional[str] = None
    output_format: str = "json"

    def __post_init__(self) -> None:
        if not 0.0 < self.level < 1.0:
            raise SpecError(f"level must be in (0, 1), got {self.level}")
        if self.interval_kind not in ("shortest", "central"):
            raise SpecError(f"interval kind must be shortest or central, got {self.interval_kind!r}")
        if self.output_format not in ("json", "text"):
            raise SpecError(f"output format must be json or text, got {self.output_format!r}")
        if not self.methods:
            raise SpecError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHOD_ORDER]
        if unknown:
            raise SpecError(f"unknown methods: {', '.join(unknown)}")
        if self.subset_last is not None and self.subset_last < 1:
            raise SpecError(f"subset size must be positive, got {self.subset_last}")
        parse_tau_prior(self.tau_prior_spec)
        parse_effect_prior(self.effect_prior_spec)


@dataclass(frozen=True)
class MethodBlock:
    method: str
    estimate: float
    se_or_sd: float
    interval: Interval
    level: float


@dataclass(frozen=True)
class TauBlock:
    estimate: float
    interval: Interval
    posterior_median: Optional[float] = None
    posterior_interval: Optional[Interval] = None


@dataclass(frozen=True)
class AnalysisReport:
    k: int
    config: AnalysisConfig
    source: Optional[str]
    results: tuple[MethodBlock, ...]
    tau: TauBlock
    mu_mixture: Optional[bayes.NormalMixture] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SensitivityRun:
    tau_prior_spec: str
    report: Optional[AnalysisReport]
    error: Optional[str]


def run_analysis(dataset: Dataset, config: AnalysisConfig,
                 source: Optional[str] = None) -> AnalysisReport:
    """Run every configured method on the (optionally subset) dataset."""
    if config.subset_last is not None:
        dataset = subset_last(dataset, config.subset_last)
    tau_prior = parse_tau_prior(config.tau_prior_spec)
    effect_prior = parse_effect_prior(config.effect_prior_spec)

    blocks: list[MethodBlock] = []
    tau_freq: Optional[tuple[float, Interval]] = None
    tau_bayes: Optional[bayes.PosteriorSummary] = None
    mixture: Optional[bayes.NormalMixture] = None

    for method in METHOD_ORDER:
        if method not in config.methods:
            continue
        try:
            if method == "bayes":
                tp = bayes.build_tau_posterior(dataset, tau_prior, effect_prior)
                mixture = bayes.mu_marginal_mixture(dataset, tau_prior, effect_prior, tp)
                _, sd = bayes.moment_matched_normal(mixture)
                blocks.append(MethodBlock(
                    method="bayes",
                    estimate=bayes.mixture_quantile(mixture, 0.5),
                    se_or_sd=sd,
                    interval=bayes.credible_interval(mixture, config.level,
                                                     config.interval_kind),
                    level=config.level))
                tau_bayes = bayes.tau_posterior_summary(tp, config.level)
            else:
                if method == "common":
                    res = freq.common_effect(dataset, config.level)
                elif method in ("dl", "reml"):
                    res = freq.random_effects_normal(dataset, method, config.level)
                else:
                    res = freq.hksj_interval(dataset, level=config.level)
                blocks.append(MethodBlock(
                    method=method, estimate=res.mu_hat, se_or_sd=res.se_mu,
                    interval=res.interval, level=config.level))
                if method in TAU_ESTIMATOR_ORDER and tau_freq is None:
                    tau_freq = (res.tau_hat, res.tau_interval)
        except MetaError as exc:
            raise type(exc)(f"method {method}: {exc}") from exc

    if tau_freq is not None:
        estimate, interval = tau_freq
    elif tau_bayes is not None:
        estimate, interval = tau_bayes.median, tau_bayes.interval
    else:
        estimate, interval = 0.0, Interval(0.0, 0.0)
    tau_block = TauBlock(
        estimate=estimate, interval=interval,
        posterior_median=tau_bayes.median if tau_bayes else None,
        posterior_interval=tau_bayes.interval if tau_bayes else None)
    return AnalysisReport(k=dataset.k, config=config, source=source,
                          results=tuple(blocks), tau=tau_block, mu_mixture=mixture)


def run_sensitivity(dataset: Dataset, base_config: AnalysisConfig,
                    tau_prior_specs: list[str],
                    source: Optional[str] = None) -> list[SensitivityRun]:
    """One analysis per heterogeneity-prior spec; bad specs are reported, the
    remaining ones still run."""
    runs = []
    for spec in tau_prior_specs:
        try:
            cfg = replace(base_config, tau_prior_spec=spec)
            runs.append(SensitivityRun(spec, run_analysis(dataset, cfg, source), None))
        except MetaError as exc:
            runs.append(SensitivityRun(spec, None, str(exc)))
    return runs


def _sig(x: float) -> float:
    if x == 0.0:
        return 0.0
    return float(f"{x:.{JSON_SIG_DIGITS}g}")


def _interval_list(iv: Interval) -> list[float]:
    return [_sig(iv.lo), _sig(iv.hi)]


def report_dict(report: AnalysisReport) -> dict:
    """Report as a plain dict with stable key order and 6-significant-digit numbers."""
    cfg = report.config
    out: dict = {
        "k": report.k,
        "config": {
            "input": report.source,
            "tau_prior": cfg.tau_prior_spec,
            "mu_prior": cfg.effect_prior_spec,
            "level": _sig(cfg.level),
            "interval_kind": cfg.interval_kind,
            "methods": [m for m in METHOD_ORDER if m in cfg.methods],
            "subset_last": cfg.subset_last,
        },
        "results": [
            {
                "method": b.method,
                "estimate": _sig(b.estimate),
                "se_or_sd": _sig(b.se_or_sd),
                "interval": _interval_list(b.interval),
                "level": _sig(b.level),
            }
            for b in report.results
        ],
        "tau": {
            "estimate": _sig(report.tau.estimate),
            "interval": _interval_list(report.tau.interval),
        },
    }
    if report.tau.posterior_median is not None:
        out["tau"]["posterior_median"] = _sig(report.tau.posterior_median)
        out["tau"]["posterior_interval"] = _interval_list(report.tau.posterior_interval)
    return out


def emit_report(report: AnalysisReport, output_format: Optional[str] = None) -> str:
    """Serialize a report as JSON (default) or an aligned text table."""
    fmt = output_format or report.config.output_format
    if fmt == "json":
        return json.dumps(report_dict(report), indent=2)
    if fmt == "text":
        return _text_table(report)
    raise SpecError(f"unknown output format {fmt!r}")


def _text_table(report: AnalysisReport) -> str:
    pct = f"{report.config.level * 100:g}%"
    lines = [f"k = {report.k}"]
    if report.source:
        lines.append(f"input = {report.source}")
    lines.append("")
    lines.append(f"{'method':<8} {'estimate':>10} {'se/sd':>10}   "
                 f"{pct} interval ({report.config.interval_kind})")
    for b in report.results:
        lines.append(f"{b.method:<8} {b.estimate:>10.4f} {b.se_or_sd:>10.4f}   "
                     f"[{b.interval.lo:.4f}, {b.interval.hi:.4f}]")
    lines.append("")
    lines.append(f"tau estimate = {report.tau.estimate:.4f}   "
                 f"interval [{report.tau.interval.lo:.4f}, {report.tau.interval.hi:.4f}]")
    if report.tau.posterior_median is not None:
        pi = report.tau.posterior_interval
        lines.append(f"tau posterior median = {report.tau.posterior_median:.4f}   "
                     f"interval [{pi.lo:.4f}, {pi.hi:.4f}]")
    return "\n".join(lines)
