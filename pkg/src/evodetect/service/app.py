"""HTTP service exposing the analysis and simulation operations.

All endpoints are POST with JSON bodies; domain validation errors
(ValueError from the core layer) come back as 422 with the message in
``detail``.  The CLI talks to this app in process by default, so the
service is the single code path for every interface.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import experiments, meanfield, network, simulator
from ..model import centralized_decision
from .schemas import (
    DetectRequest,
    DetectResponse,
    EssRequest,
    EssResponse,
    GraphGenerateRequest,
    GraphGenerateResponse,
    GraphValidateRequest,
    GraphValidateResponse,
    HealthResponse,
    MeanfieldRequest,
    MeanfieldResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
    SweepRowOut,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="evodetect",
        description=(
            "Distributed binary detection via an evolutionary game on "
            "regular networks."
        ),
    )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok")

    @app.post("/detect", response_model=DetectResponse)
    def detect(req: DetectRequest) -> DetectResponse:
        res = centralized_decision(req.profile.to_domain())
        return DetectResponse(
            discriminant=res.discriminant,
            decision=res.decision,
            indifferent=res.indifferent,
        )

    @app.post("/ess", response_model=EssResponse)
    def ess(req: EssRequest) -> EssResponse:
        rep = meanfield.classify_ess(req.profile.to_domain(), req.params.to_domain())
        return EssResponse(
            discriminant=rep.discriminant,
            threshold=rep.threshold,
            ess_set=sorted(rep.ess_set),
            interior_point=rep.interior_point,
            interior_degenerate=rep.interior_degenerate,
            predicted_limit_from_half=rep.predicted_limit_from_half,
            at_threshold=rep.at_threshold,
        )

    @app.post("/meanfield", response_model=MeanfieldResponse)
    def run_meanfield(req: MeanfieldRequest) -> MeanfieldResponse:
        x0 = req.x0 if isinstance(req.x0, float) else tuple(req.x0)
        traj = meanfield.integrate(
            req.profile.to_domain(),
            req.params.to_domain(),
            x0=x0,
            t_end=req.t_end,
            n_samples=req.n_samples,
        )
        total, per_type = traj.terminal
        return MeanfieldResponse(
            terminal_x=total,
            terminal_x_per_type=list(per_type),
            csv=traj.to_csv(),
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        profile = req.profile.to_domain()
        params = req.params.to_domain()
        ens = simulator.run_ensemble(
            profile,
            params,
            trials=req.trials,
            base_seed=req.base_seed,
            max_steps=req.max_steps,
            sample_every=req.sample_every,
            initial_rule=req.initial_rule,
            graph_per_trial=req.graph_per_trial,
            graph_seed=req.graph_seed,
            workers=req.workers,
        )
        trajectory = (
            simulator.ensemble_trajectory_csv(ens) if req.sample_every > 0 else None
        )
        return SimulateResponse(
            trials=ens.trials,
            mean_final_x=ens.mean_final_x,
            mean_final_x_per_type=list(ens.mean_final_x_per_type),
            absorbed_fraction=ens.absorbed_fraction,
            mean_steps_run=ens.mean_steps_run,
            final_x=[r.final_x for r in ens.results],
            steps_run=[r.steps_run for r in ens.results],
            absorbed=[r.absorbed for r in ens.results],
            summary_csv=simulator.ensemble_summary_csv(ens, profile, params),
            trajectory_csv=trajectory,
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        cfg = req.model_dump()
        if cfg.get("grid") is None:
            cfg.pop("grid")
        spec = experiments.build_spec(cfg)
        rows = experiments.run_sweep(spec)
        csv, summary = experiments.emit_report(rows)
        return SweepResponse(
            rows=[
                SweepRowOut(
                    swept_value=r.swept_value,
                    discriminant=r.discriminant,
                    centralized_decision=r.centralized_decision,
                    predicted_limit=r.predicted_limit,
                    meanfield_final_x=r.meanfield_final_x,
                    simulated_mean_final_x=r.simulated_mean_final_x,
                    trials=r.trials,
                )
                for r in rows
            ],
            csv=csv,
            summary=summary,
        )

    @app.post("/graph/generate", response_model=GraphGenerateResponse)
    def graph_generate(req: GraphGenerateRequest) -> GraphGenerateResponse:
        g = network.generate_regular(
            req.n, req.k, req.seed, max_retries=req.max_retries
        )
        return GraphGenerateResponse(
            n=g.n, k=g.k, connected=g.is_connected(), edge_list=g.to_edge_list()
        )

    @app.post("/graph/validate", response_model=GraphValidateResponse)
    def graph_validate(req: GraphValidateRequest) -> GraphValidateResponse:
        g = network.from_edge_list(req.edge_list, n=req.n, k=req.k)
        violations = network.validate(g)
        return GraphValidateResponse(
            ok=not violations,
            violations=violations,
            n=g.n,
            k=g.k,
            connected=g.is_connected(),
        )

    return app


app = create_app()


def main() -> None:
    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=8000)


if __name__ == "__main__":
    main()
