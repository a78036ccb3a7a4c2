"""FastAPI service exposing the laboratory over HTTP.

The service is stateless: inputs (meshes, configs) travel in request bodies,
results come back as JSON; file handling lives in the CLI client.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, bands
from ..awf import AwfConfig, osc_lower_bound_certificate
from ..dyadic import sparse_stopping
from ..harness import config_from_dict, constancy_defect, two_sided_report
from ..lattice import (
    MeshFunction,
    MeshFunction1D,
    read_mesh1d_csv,
    read_mesh_csv,
    write_mesh_csv,
)
from ..modelops import apply_model, spec_from_json
from ..norms import (
    ap_characteristic,
    bloom_bmo,
    holder_seminorm,
    inf_const_mixed_norm,
    little_bmo,
    sparse_osc_sup,
)
from .schemas import (
    AwfRequest,
    AwfResponse,
    BandsCheckRequest,
    BandsCheckResponse,
    BandsRegenerateRequest,
    BandsResponse,
    CheckModel,
    ModelApplyRequest,
    ModelApplyResponse,
    NormsRequest,
    NormsResponse,
    ReportRequest,
    ReportResponse,
    SparseRequest,
    SparseResponse,
)

app = FastAPI(title="bpcl", version=__version__)


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/awf", response_model=AwfResponse)
def awf_endpoint(req: AwfRequest) -> AwfResponse:
    try:
        cfg = config_from_dict(req.config.as_config_dict())
        cert = osc_lower_bound_certificate(
            cfg.symbol(), cfg.kernel, cfg.rectangle(), AwfConfig(A=cfg.A)
        )
    except Exception as exc:
        raise _bad_request(exc) from exc
    return AwfResponse(**cert.as_dict())


def _parse_which(which: str) -> list[tuple[str, dict]]:
    out = []
    for piece in which.split(","):
        parts = piece.strip().split(":")
        name, params = parts[0], {}
        for kv in parts[1:]:
            k, v = kv.split("=")
            params[k] = v
        out.append((name, params))
    return out


@app.post("/norms", response_model=NormsResponse)
def norms_endpoint(req: NormsRequest) -> NormsResponse:
    try:
        b = read_mesh_csv(req.mesh_csv)
        results: dict = {}
        for name, params in _parse_which(req.which):
            if name == "bmo":
                results["bmo"] = little_bmo(b)
            elif name == "holder":
                alpha = float(params.get("alpha", 1.0))
                axis = int(params.get("axis", 2))
                results[f"holder:alpha={alpha}:axis={axis}"] = holder_seminorm(b, alpha, axis)
            elif name == "ap":
                p = float(params.get("p", 2.0))
                mu = MeshFunction(b.domain, np.abs(b.values))
                results[f"ap:p={p}"] = ap_characteristic(mu, p)
            elif name == "bloom":
                if req.weight_csv is None:
                    raise ValueError("bloom needs weight_csv for nu")
                nu = read_mesh_csv(req.weight_csv)
                results["bloom"] = bloom_bmo(b, nu)
            elif name == "inf":
                spec = params.get("spec", "Lr")
                kw = {k: float(v) for k, v in params.items() if k in ("r", "r1", "r2")}
                value, c = inf_const_mixed_norm(b, spec, **kw)
                results[f"inf:{spec}"] = {"value": value, "c_re": c.real, "c_im": c.imag}
            elif name == "sparse_osc":
                r = float(params.get("r", 2.0))
                results[f"sparse_osc:r={r}"] = sparse_osc_sup(b, r)
            elif name == "constancy":
                mode = params.get("mode", "global")
                results[f"constancy:{mode}"] = constancy_defect(b, mode)
            else:
                raise ValueError(f"unknown functional {name!r}")
    except HTTPException:
        raise
    except Exception as exc:
        raise _bad_request(exc) from exc
    return NormsResponse(results=results)


@app.post("/sparse", response_model=SparseResponse)
def sparse_endpoint(req: SparseRequest) -> SparseResponse:
    try:
        text = req.mesh_csv
        header_vals = text.strip().splitlines()[1].split(",")
        is_1d = int(header_vals[1]) == 1
        if is_1d:
            u = read_mesh1d_csv(text)
            if req.recenter:
                u = MeshFunction1D(u.grid, u.values - u.values.mean())
            col = sparse_stopping(u)
        else:
            f = read_mesh_csv(text)
            if req.recenter:
                f = MeshFunction(f.domain, f.values - f.values.mean())
            col = sparse_stopping(f)
        tree = col.to_tree_json()
    except Exception as exc:
        raise _bad_request(exc) from exc
    return SparseResponse(tree=tree, node_count=len(tree))


@app.post("/model/apply", response_model=ModelApplyResponse)
def model_endpoint(req: ModelApplyRequest) -> ModelApplyResponse:
    try:
        f = read_mesh_csv(req.mesh_csv)
        spec = spec_from_json(f.domain, req.spec.model_dump())
        out = apply_model(spec, f)
    except Exception as exc:
        raise _bad_request(exc) from exc
    return ModelApplyResponse(mesh_csv=write_mesh_csv(out))


def _report_checks(report_dict: dict, label: str, symbol_kind: str) -> list[CheckModel]:
    try:
        committed = bands.load_bands()
    except FileNotFoundError:
        return []
    checks = []
    key = f"report/{label}|{symbol_kind}"
    for field, value in (
        ("lower", report_dict["lower"]["value"]),
        ("upper", report_dict["upper"]["value"]),
        ("nhat", report_dict["nhat"]),
    ):
        band = committed.get(f"{key}|{field}")
        if band is None:
            continue
        ok = band["lo"] - 1e-15 <= value <= band["hi"] + 1e-15
        checks.append(
            CheckModel(name=f"{key}|{field}", measured=value, lo=band["lo"], hi=band["hi"], ok=ok)
        )
    return checks


@app.post("/report", response_model=ReportResponse)
def report_endpoint(req: ReportRequest) -> ReportResponse:
    try:
        cfg = config_from_dict(req.config.as_config_dict())
        rep = two_sided_report(cfg)
    except Exception as exc:
        raise _bad_request(exc) from exc
    checks = _report_checks(rep.as_dict(), rep.label, cfg.symbol_kind) if req.check_bands else []
    return ReportResponse(
        report=rep.as_dict(), checks=checks, passed=all(c.ok for c in checks)
    )


@app.get("/bands", response_model=BandsResponse)
def bands_endpoint() -> BandsResponse:
    try:
        return BandsResponse(bands=bands.load_bands())
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail="no committed bands") from exc


@app.post("/bands/check", response_model=BandsCheckResponse)
def bands_check_endpoint(req: BandsCheckRequest) -> BandsCheckResponse:
    try:
        checks = [CheckModel(**c) for c in bands.check_bands(req.groups)]
    except Exception as exc:
        raise _bad_request(exc) from exc
    return BandsCheckResponse(checks=checks, passed=all(c.ok for c in checks))


@app.post("/bands/regenerate", response_model=BandsResponse)
def bands_regenerate_endpoint(req: BandsRegenerateRequest) -> BandsResponse:
    try:
        measured = bands.measure_all(req.groups)
        fresh = bands.make_bands(measured, margin=req.margin)
        if req.groups:
            merged = bands.load_bands()
            merged.update(fresh)
            fresh = merged
    except Exception as exc:
        raise _bad_request(exc) from exc
    return BandsResponse(bands=fresh)
