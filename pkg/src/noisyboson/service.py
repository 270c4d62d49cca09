"""HTTP service exposing the toolkit: exact tables, samplers, the
verification suite, and bound evaluation.

The service is stateless; the unitary is either posted explicitly or drawn
from the request seed via the per-component stream discipline, so identical
requests return identical payloads.
"""

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__
from .analysis import evaluate_bounds
from .linalg import haar_unitary
from .models import (
    classical_distribution,
    click_truncated_distribution,
    ideal_distribution,
    noisy_distribution,
    partial_dist_decomposed,
    truncated_distribution,
)
from .samplers import (
    sample_noise_realizations,
    sample_noisy_compositional,
    sample_table,
)
from .schemas import (
    BoundRow,
    BoundsRequest,
    BoundsResponse,
    CheckRow,
    CountRow,
    DistributionRequest,
    DistributionResponse,
    HealthResponse,
    RealizationSummary,
    RecordRow,
    SampleRequest,
    SampleResponse,
    SweepRequest,
    SweepResponse,
    SweepRow,
    VerifyRequest,
    VerifyResponse,
)
from .seeding import component_rng
from .verify import verify_all

MAX_RESPONSE_ENTRIES = 500_000

app = FastAPI(title="noisyboson", version=__version__)


def _bad_request(exc):
    return HTTPException(status_code=400, detail=str(exc))


def _unitary(req):
    if req.matrix is not None:
        rows = len(req.matrix)
        arr = np.array([[complex(pair[0], pair[1]) for pair in row]
                        for row in req.matrix], dtype=np.complex128)
        if arr.shape != (req.m, req.m):
            raise ValueError(f"matrix must be {req.m}x{req.m}, got {rows} rows")
        return arr
    if req.seed is None:
        raise ValueError("either seed or matrix is required")
    return haar_unitary(req.m, component_rng(req.seed, "unitary"))


def _build_table(model, u, n, m, epsilon, r):
    if model == "ideal":
        return ideal_distribution(u, n, m)
    if model == "classical":
        return classical_distribution(u, n, m)
    if model == "noisy_eq9":
        return noisy_distribution(u, epsilon, n, m, regime="general_eq9")
    if model == "noisy_eq5":
        return noisy_distribution(u, epsilon, n, m, regime="no_collision_eq5")
    if model == "partial":
        return partial_dist_decomposed(u, epsilon, n, m)
    if model == "truncated":
        if r is None:
            raise ValueError("model=truncated requires r")
        return truncated_distribution(u, epsilon, r, n, m)
    if model == "click":
        if r is None:
            raise ValueError("model=click requires r")
        return click_truncated_distribution(u, epsilon, r, n, m)
    raise ValueError(f"unknown model {model!r}")


@app.get("/v1/health", response_model=HealthResponse)
def health():
    return HealthResponse(status="ok", version=__version__)


@app.post("/v1/distribution", response_model=DistributionResponse)
def distribution(req: DistributionRequest):
    try:
        u = _unitary(req)
        table = _build_table(req.model, u, req.n, req.m, req.epsilon, req.r)
    except ValueError as exc:
        raise _bad_request(exc)
    if len(table.probs) > MAX_RESPONSE_ENTRIES:
        raise _bad_request(ValueError(
            f"table has {len(table.probs)} entries; over the "
            f"{MAX_RESPONSE_ENTRIES} response limit"))
    return DistributionResponse(
        model=req.model,
        n=req.n,
        m=req.m,
        total_probability=table.total_probability(),
        min_entry=table.min_entry(),
        configurations=table.configurations().tolist(),
        probabilities=table.probs.tolist(),
    )


def _count_rows(empirical):
    return [CountRow(m=list(k), count=c)
            for k, c in sorted(empirical.counts.items())]


@app.post("/v1/sample", response_model=SampleResponse)
def sample(req: SampleRequest):
    try:
        u = _unitary(req)
        if req.sampler == "table":
            if req.return_records:
                raise ValueError("records are produced by the compositional "
                                 "sampler only")
            table = _build_table(req.model, u, req.n, req.m, req.epsilon, req.r)
            if req.model == "truncated":
                table = table.clamped_normalized()
            normalize = req.model == "noisy_eq5"
            emp = sample_table(table, req.draws,
                               component_rng(req.seed, "sample"),
                               normalize=normalize)
            return SampleResponse(sampler="table", total_draws=emp.total_draws,
                                  counts=_count_rows(emp))
        if req.sampler == "compositional":
            if req.model not in ("noisy_eq9", "partial"):
                raise ValueError("compositional sampler draws from noisy_eq9 "
                                 "(uniform dark) or partial (classical dark)")
            dark = "uniform" if req.model == "noisy_eq9" else "classical"
            tag = f"{req.seed}/sample/0"
            out = sample_noisy_compositional(
                u, req.epsilon, req.n, req.m, req.draws,
                component_rng(req.seed, "sample"),
                dark=dark, return_records=req.return_records, seed_tag=tag)
            if req.return_records:
                emp, records = out
                rows = [RecordRow(m=list(r.configuration), n_quantum=r.n_quantum,
                                  stream=r.seed_tag) for r in records]
                return SampleResponse(sampler="compositional",
                                      total_draws=emp.total_draws,
                                      counts=_count_rows(emp), records=rows)
            emp = out
            return SampleResponse(sampler="compositional",
                                  total_draws=emp.total_draws,
                                  counts=_count_rows(emp))
        avg = sample_noise_realizations(
            u, req.epsilon, req.n, req.m, req.realizations,
            component_rng(req.seed, "sample"))
        table = avg.as_table()
        mask = table.no_collision_mask()
        summary = RealizationSummary(
            realizations=avg.realizations,
            no_collision_mass=avg.no_collision_mass,
            collision_mass=avg.collision_mass,
            mass_stderr=avg.mass_stderr,
            configurations=table.configurations()[mask].tolist(),
            mean=avg.mean.tolist(),
            stderr=avg.stderr.tolist(),
        )
        return SampleResponse(sampler="realizations", total_draws=0,
                              realization=summary)
    except ValueError as exc:
        raise _bad_request(exc)


@app.post("/v1/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest):
    try:
        checks = verify_all(req.n, req.m, req.epsilon, req.seed,
                            corrupt_j=req.corrupt_j)
    except ValueError as exc:
        raise _bad_request(exc)
    rows = [CheckRow(check=c.check, max_deviation=c.max_deviation,
                     tolerance=c.tolerance, passed=c.passed) for c in checks]
    return VerifyResponse(checks=rows, all_passed=all(c.passed for c in checks))


def _bound_rows(eps, n, r, eps_err):
    rows = []
    for rep in evaluate_bounds(eps, n, r=r, eps_err=eps_err):
        value = None if math.isnan(rep.value) else rep.value
        rows.append(BoundRow(bound_name=rep.bound_name, value=value,
                             inputs=rep.inputs, satisfied=rep.satisfied))
    return rows


@app.post("/v1/bounds", response_model=BoundsResponse)
def bounds(req: BoundsRequest):
    try:
        rows = _bound_rows(req.epsilon, req.n, req.r, req.eps_err)
    except ValueError as exc:
        raise _bad_request(exc)
    return BoundsResponse(reports=rows)


@app.post("/v1/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest):
    rows = []
    try:
        for v in req.values:
            n, eps, r = req.n, req.epsilon, req.r
            if req.param == "epsilon":
                eps = float(v)
            elif req.param == "n":
                n = int(v)
                if req.eps_over_n is not None:
                    eps = req.eps_over_n / n
            else:
                r = int(v)
            reports = _bound_rows(eps, n, r, req.eps_err)
            rows.append(SweepRow(
                n=n, epsilon=eps, r=r,
                bounds={rep.bound_name: rep.value for rep in reports}))
    except ValueError as exc:
        raise _bad_request(exc)
    return SweepResponse(param=req.param, rows=rows)
