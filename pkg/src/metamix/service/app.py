"""FastAPI service wrapping the analysis pipeline.

The CLI goes through the same handler functions in-process, so local runs and
remote runs produce identical reports.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from ..analysis import AnalysisConfig, report_dict, run_analysis, run_sensitivity
from ..csvio import parse_csv_text
from ..data import Dataset, Study
from ..errors import ConvergenceError, DataError, MetaError, SpecError
from ..svgplot import freq_curve_for, render_density_svg
from .schemas import (
    AnalyzeRequest,
    HealthResponse,
    ReportModel,
    SensitivityRequest,
    SensitivityResponse,
    SensitivityRunModel,
)

_STATUS = {SpecError: 400, DataError: 422, ConvergenceError: 500}


def dataset_from_request(req: AnalyzeRequest) -> Dataset:
    if req.csv_text is not None:
        return parse_csv_text(req.csv_text)
    return Dataset(tuple(Study(label=s.label, y=s.y, sigma=s.se) for s in req.studies))


def config_from_request(req: AnalyzeRequest) -> AnalysisConfig:
    c = req.config
    return AnalysisConfig(
        tau_prior_spec=c.tau_prior,
        effect_prior_spec=c.mu_prior,
        level=c.level,
        interval_kind=c.interval,
        methods=tuple(c.methods),
        subset_last=c.subset_last,
    )


def handle_analyze(req: AnalyzeRequest) -> dict:
    dataset = dataset_from_request(req)
    report = run_analysis(dataset, config_from_request(req))
    return report_dict(report)


def handle_sensitivity(req: SensitivityRequest) -> list[SensitivityRunModel]:
    dataset = dataset_from_request(req)
    runs = run_sensitivity(dataset, config_from_request(req), req.tau_priors)
    return [
        SensitivityRunModel(
            tau_prior=r.tau_prior_spec,
            report=report_dict(r.report) if r.report is not None else None,
            error=r.error,
        )
        for r in runs
    ]


def handle_plot(req: AnalyzeRequest) -> str:
    dataset = dataset_from_request(req)
    config = config_from_request(req)
    if "bayes" not in config.methods:
        raise SpecError("density plot requires the bayes method in the analysis")
    report = run_analysis(dataset, config)
    return render_density_svg(report, freq_curve_for(report, dataset))


def create_app() -> FastAPI:
    app = FastAPI(title="metamix", version="0.1.0",
                  description="Random-effects meta-analysis with exact "
                              "normal-mixture posteriors")

    @app.exception_handler(MetaError)
    async def _meta_error(request: Request, exc: MetaError) -> JSONResponse:
        status = next((code for cls, code in _STATUS.items() if isinstance(exc, cls)), 400)
        return JSONResponse(status_code=status,
                            content={"error": {"kind": type(exc).__name__,
                                               "message": str(exc)}})

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse()

    @app.post("/analyze", response_model=ReportModel, response_model_exclude_none=True)
    async def analyze(req: AnalyzeRequest) -> dict:
        return handle_analyze(req)

    @app.post("/sensitivity", response_model=SensitivityResponse,
              response_model_exclude_none=True)
    async def sensitivity(req: SensitivityRequest) -> dict:
        return {"runs": handle_sensitivity(req)}

    @app.post("/plot")
    async def plot(req: AnalyzeRequest) -> Response:
        return Response(content=handle_plot(req), media_type="image/svg+xml")

    return app


app = create_app()
