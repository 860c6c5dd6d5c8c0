"""HTTP service wrapping the core package.

Error convention: malformed inputs (parse errors, dimension mismatches, bad
parameters) return 400; solver failures on well-formed inputs (infeasible
growth loops, rank-deficient systems, pivot budget exhaustion) return 409.
Both carry ``{"detail": {"error": <type>, "message": <text>}}``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, harness, selfcheck
from ..baseline import gd_invert, pgd_sense
from ..invert import InversionError, LpInvertConfig, invert_network, invert_realizable, \
    theoretical_bound
from ..linalg import Matrix, RankDeficient, SingularMatrix, Vector
from ..lp import IterationLimit
from ..model import (Activation, dumps_net, forward, forward_trace, loads_net,
                     absorb_bias, random_gaussian_net)
from ..reductions import (brute_force_sat, build_binary_gadget, build_real_gadget,
                          parse_dimacs)
from . import schemas as s

_SOLVER_ERRORS = (InversionError, IterationLimit, SingularMatrix, RankDeficient)


def _error_payload(exc: Exception) -> dict:
    return {"detail": {"error": type(exc).__name__, "message": str(exc)}}


def create_app() -> FastAPI:
    app = FastAPI(title="genvert", version=__version__,
                  description="Latent recovery for small generative networks.")

    @app.exception_handler(InversionError)
    @app.exception_handler(IterationLimit)
    @app.exception_handler(SingularMatrix)
    @app.exception_handler(RankDeficient)
    async def _solver_error(request: Request, exc: Exception):
        return JSONResponse(status_code=409, content=_error_payload(exc))

    @app.exception_handler(ValueError)
    async def _bad_input(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content=_error_payload(exc))

    @app.get("/health", response_model=s.HealthResponse)
    def health():
        return s.HealthResponse(status="ok", version=__version__)

    @app.post("/forward", response_model=s.ForwardResponse)
    def forward_pass(req: s.ForwardRequest):
        net = loads_net(req.net_text)
        z = Vector(req.latent)
        if req.trace:
            trace = forward_trace(net, z)
            return s.ForwardResponse(output=trace[-1].tolist(),
                                     trace=[v.tolist() for v in trace])
        return s.ForwardResponse(output=forward(net, z).tolist())

    @app.post("/invert", response_model=s.InvertReportModel)
    def invert(req: s.InvertRequest):
        net = loads_net(req.net_text)
        x = Vector(req.observation)
        if req.method == "exact":
            report = invert_realizable(net, x)
        elif req.method == "gd":
            report = gd_invert(net, x, cfg=req.gd.to_config())
        elif req.method in ("linf", "l1", "relaxed"):
            report = invert_network(net, x, req.method, req.lp.to_config())
        else:
            raise ValueError(f"unknown method {req.method!r}")
        return s.InvertReportModel.from_report(report)

    @app.post("/networks/random", response_model=s.NetResponse)
    def random_net(req: s.RandomNetRequest):
        if req.activation == "relu":
            act = Activation.relu()
        elif req.activation == "leaky":
            act = Activation.leaky(req.leaky_slope)
        else:
            raise ValueError(f"unknown activation {req.activation!r}")
        net = random_gaussian_net(req.dims, req.weight_std_rule, req.seed, act)
        return s.NetResponse(net_text=dumps_net(net), input_dim=net.input_dim,
                             output_dim=net.output_dim, depth=net.depth)

    @app.post("/networks/absorb-bias", response_model=s.NetResponse)
    def absorb(req: s.AbsorbBiasRequest):
        net = absorb_bias(loads_net(req.net_text))
        return s.NetResponse(net_text=dumps_net(net), input_dim=net.input_dim,
                             output_dim=net.output_dim, depth=net.depth)

    @app.post("/reduce", response_model=s.ReduceResponse)
    def reduce(req: s.ReduceRequest):
        f = parse_dimacs(req.dimacs)
        if req.gadget == "binary":
            net, target = build_binary_gadget(f)
        elif req.gadget == "real":
            net, target = build_real_gadget(f)
        else:
            raise ValueError(f"unknown gadget {req.gadget!r}")
        return s.ReduceResponse(net_text=dumps_net(net), target=target.tolist(),
                                num_vars=f.num_vars, num_clauses=f.num_clauses)

    @app.post("/sat/brute-force", response_model=s.BruteForceResponse)
    def brute_force(req: s.BruteForceRequest):
        assignment = brute_force_sat(parse_dimacs(req.dimacs))
        return s.BruteForceResponse(
            satisfiable=assignment is not None,
            assignment=None if assignment is None else list(assignment))

    @app.post("/sense", response_model=s.InvertReportModel)
    def sense(req: s.SenseRequest):
        net = loads_net(req.net_text)
        report = pgd_sense(net, Vector(req.observation), req.operator.to_operator(),
                           inner_method=req.inner_method, outer_iters=req.outer_iters,
                           step=req.step, cfg=req.lp.to_config())
        return s.InvertReportModel.from_report(report)

    @app.post("/bound", response_model=s.BoundResponse)
    def bound(req: s.BoundRequest):
        b = theoretical_bound(req.depth, req.epsilon, req.assumed_c, req.norm)
        return s.BoundResponse(depth=b.depth, epsilon=b.epsilon, assumed_c=b.assumed_c,
                               norm=b.norm, value=b.value)

    @app.post("/estimate-constant", response_model=s.ConstantEstimateResponse)
    def estimate_constant(req: s.ConstantEstimateRequest):
        c_hat = harness.estimate_assumption_constant(
            Matrix.from_rows(req.matrix), req.subset_size, req.norm,
            req.samples, req.seed)
        return s.ConstantEstimateResponse(c_hat=c_hat)

    def _record_model(r: harness.TrialRecord) -> s.TrialRecordModel:
        return s.TrialRecordModel(
            method=r.method, trial=r.trial, noise_kind=r.noise_kind,
            noise_level=r.noise_level, rel_noise=r.rel_noise, rel_error=r.rel_error,
            residual_linf=r.residual_linf, residual_l1=r.residual_l1,
            residual_l2=r.residual_l2, success=r.success,
            solver_count=r.solver_count, error=r.error)

    @app.post("/experiments/noise-sweep", response_model=s.NoiseSweepResponse)
    def noise_sweep(req: s.NoiseSweepRequest):
        levels = req.noise_levels if req.noise_kind != "none" else [0.0]
        records: list[harness.TrialRecord] = []
        base_cfg = None
        for level in levels:
            cfg = harness.TrialConfig(
                dims=tuple(req.dims), methods=tuple(req.methods),
                noise=harness.NoiseSpec(req.noise_kind, level),
                trials=req.trials, success_threshold=req.success_threshold,
                base_seed=req.base_seed, weight_std_rule=req.weight_std_rule,
                lp=req.lp.to_config(), gd=req.gd.to_config())
            base_cfg = base_cfg or cfg
            records.extend(harness.run_noise_sweep(cfg))
        metadata = harness.sweep_metadata(base_cfg)
        metadata += f"noise_levels={','.join(repr(l) for l in levels)}\n"
        return s.NoiseSweepResponse(
            csv=harness.records_to_csv(records), metadata=metadata,
            records=[_record_model(r) for r in records])

    @app.post("/experiments/success-vs-k", response_model=s.SuccessVsKResponse)
    def success_vs_k(req: s.SuccessVsKRequest):
        cfg = harness.TrialConfig(
            dims=(1, req.hidden, req.output),  # k slot is replaced per requested value
            methods=tuple(req.methods),
            noise=harness.NoiseSpec(req.noise_kind, req.noise_level),
            trials=req.trials, success_threshold=req.success_threshold,
            base_seed=req.base_seed, weight_std_rule=req.weight_std_rule,
            lp=req.lp.to_config(), gd=req.gd.to_config())
        rows = harness.run_success_vs_k(cfg, req.k_values)
        metadata = harness.sweep_metadata(cfg)
        metadata += f"k_values={','.join(str(k) for k in req.k_values)}\n"
        return s.SuccessVsKResponse(
            rows=[s.SuccessRowModel(k=r.k, method=r.method,
                                    success_rate=r.success_rate, trials=r.trials)
                  for r in rows],
            csv=harness.success_table_to_csv(rows), metadata=metadata)

    @app.post("/experiments/timing", response_model=s.TimingResponse)
    def timing(req: s.TimingRequest):
        cfg = harness.TrialConfig(
            dims=tuple(req.dims), methods=tuple(req.methods),
            noise=harness.NoiseSpec(req.noise_kind, req.noise_level),
            trials=req.trials, success_threshold=req.success_threshold,
            base_seed=req.base_seed, weight_std_rule=req.weight_std_rule,
            lp=req.lp.to_config(), gd=req.gd.to_config())
        rows = harness.run_timing(cfg)
        return s.TimingResponse(
            rows=[s.TimingRowModel(method=r.method, k=r.k, mean_wall_s=r.mean_wall_s,
                                   trials=r.trials) for r in rows],
            csv=harness.timing_table_to_csv(rows))

    @app.post("/verify", response_model=s.VerifyResponse)
    def verify():
        checks = selfcheck.run_self_checks()
        return s.VerifyResponse(
            passed=all(c.passed for c in checks),
            checks=[s.CheckModel(name=c.name, passed=c.passed, detail=c.detail)
                    for c in checks])

    return app


app = create_app()
