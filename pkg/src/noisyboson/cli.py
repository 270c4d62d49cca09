"""Command line runner.

The CLI is a thin client of the HTTP service: by default requests run
against the app in-process (no socket); --server points the same commands
at a running instance.  Exit codes: 0 success, 1 failed check or transport
failure, 2 invalid input or guard violation.
"""

import asyncio
import dataclasses
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .fileio import (
    ExperimentConfig,
    config_hash,
    parse_config_file,
    read_matrix_csv,
    write_counts_csv,
    write_json,
    write_jsonl,
    write_meta,
    write_sweep_csv,
    write_table_csv,
)

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_EXTRA_KEYS = {"param", "sampler", "values", "eps_over_n"}


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _post(server, path, payload):
    try:
        if server:
            return httpx.post(server.rstrip("/") + path, json=payload,
                              timeout=600.0)

        async def _call():
            from .service import app
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://noisyboson.local",
                                         timeout=600.0) as client:
                return await client.post(path, json=payload)

        return asyncio.run(_call())
    except httpx.HTTPError as exc:
        _fail(f"transport failure: {exc}", 1)


def _payload_of(resp):
    if resp.status_code == 200:
        return resp.json()
    if resp.status_code in (400, 422):
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        _fail(detail, 2)
    _fail(f"HTTP {resp.status_code}: {resp.text}", 1)


def _merge(command, config_path, **flags):
    """defaults < config file < explicit flags; unknown keys rejected."""
    values = {}
    extras = {}
    if config_path:
        for k, v in parse_config_file(config_path).items():
            if k in _EXTRA_KEYS:
                extras[k] = v
            elif k in _CONFIG_FIELDS:
                values[k] = v
            else:
                raise ValueError(f"unknown config key {k!r}")
    for k, v in flags.items():
        if v is None:
            continue
        if k in _EXTRA_KEYS:
            extras[k] = v
        else:
            values[k] = v
    values["command"] = command
    return values, extras


def _finalize(values, fill_m=False):
    # bounds and sweep involve no network, so the mode count defaults to
    # the boson count there instead of being a required input
    if fill_m and "m" not in values:
        values["m"] = values.get("n", 0)
    return ExperimentConfig(**values).validate()


def _resolve(command, config_path, fill_m=False, **flags):
    try:
        values, extras = _merge(command, config_path, **flags)
        cfg = _finalize(values, fill_m)
    except (ValueError, TypeError) as exc:
        _fail(str(exc), 2)
    return cfg, extras


def _meta(cfg):
    # output location is excluded so the same experiment written to two
    # places produces byte-identical files
    payload = {k: v for k, v in cfg.as_dict().items() if k != "output_dir"}
    return {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "config": payload,
    }


def _out_dir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _matrix_payload(matrix_path):
    if matrix_path is None:
        return None
    try:
        u = read_matrix_csv(matrix_path)
    except (ValueError, OSError) as exc:
        _fail(str(exc), 2)
    return [[[z.real, z.imag] for z in row] for row in u]


def _common_options(fn):
    for deco in (
        click.option("--config", "config_path", type=click.Path(exists=True),
                     default=None, help="flat key = value config file"),
        click.option("--seed", type=int, default=None),
        click.option("--out", "output_dir", default=None,
                     help="output directory"),
    ):
        fn = deco(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="noisyboson")
@click.option("--server", default=None, envvar="NOISYBOSON_SERVER",
              help="base URL of a running service; default runs in-process")
@click.pass_context
def cli(ctx, server):
    """Noisy multi-boson interference: exact tables, samplers, bounds."""
    ctx.obj = {"server": server}


@cli.command()
@click.option("--n", type=int, default=None, help="boson count")
@click.option("--m", type=int, default=None, help="mode count")
@click.option("--epsilon", type=float, default=None)
@click.option("--r", type=int, default=None)
@click.option("--model", default=None)
@click.option("--matrix", "matrix_path", type=click.Path(exists=True),
              default=None, help="CSV matrix instead of a seeded draw")
@_common_options
@click.pass_context
def distribution(ctx, n, m, epsilon, r, model, matrix_path, config_path,
                 seed, output_dir):
    """Build an exact probability table and write it as CSV."""
    cfg, _ = _resolve("distribution", config_path, n=n, m=m, epsilon=epsilon,
                      r=r, model=model, seed=seed, output_dir=output_dir)
    payload = {"n": cfg.n, "m": cfg.m, "model": cfg.model,
               "epsilon": cfg.epsilon, "r": cfg.r, "seed": cfg.seed,
               "matrix": _matrix_payload(matrix_path)}
    data = _payload_of(_post(ctx.obj["server"], "/v1/distribution", payload))
    out = _out_dir(cfg)
    write_table_csv(out / "distribution.csv", data["configurations"],
                    data["probabilities"])
    write_meta(out / "distribution.meta.json", _meta(cfg))
    click.echo(f"{cfg.model}: {len(data['probabilities'])} configurations, "
               f"total {data['total_probability']:.12f}, "
               f"min entry {data['min_entry']:.3e}")
    click.echo(f"wrote {out / 'distribution.csv'}")


@cli.command()
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--r", type=int, default=None)
@click.option("--model", default=None)
@click.option("--sampler", default=None,
              type=click.Choice(["table", "compositional", "realizations"]))
@click.option("--draws", type=int, default=None)
@click.option("--realizations", type=int, default=None)
@click.option("--records/--no-records", "want_records", default=False,
              help="also export the per-draw record stream")
@click.option("--matrix", "matrix_path", type=click.Path(exists=True),
              default=None)
@_common_options
@click.pass_context
def sample(ctx, n, m, epsilon, r, model, sampler, draws, realizations,
           want_records, matrix_path, config_path, seed, output_dir):
    """Draw from a model and write tallies (and optionally records)."""
    cfg, extras = _resolve("sample", config_path, n=n, m=m, epsilon=epsilon,
                           r=r, model=model, draws=draws,
                           realizations=realizations, seed=seed,
                           output_dir=output_dir, sampler=sampler)
    sampler = extras.get("sampler", "table")
    payload = {"n": cfg.n, "m": cfg.m, "epsilon": cfg.epsilon, "r": cfg.r,
               "model": cfg.model, "sampler": sampler, "draws": cfg.draws,
               "realizations": cfg.realizations, "seed": cfg.seed,
               "return_records": want_records,
               "matrix": _matrix_payload(matrix_path)}
    data = _payload_of(_post(ctx.obj["server"], "/v1/sample", payload))
    out = _out_dir(cfg)
    write_meta(out / "samples.meta.json", _meta(cfg))
    if sampler == "realizations":
        rz = data["realization"]
        write_table_csv(out / "realizations.csv", rz["configurations"], None,
                        value_columns=[("mean", rz["mean"]),
                                       ("stderr", rz["stderr"])])
        click.echo(f"{rz['realizations']} realizations, collision mass "
                   f"{rz['collision_mass']:.4e}")
        click.echo(f"wrote {out / 'realizations.csv'}")
        return
    counts = {tuple(row["m"]): row["count"] for row in data["counts"]}
    write_counts_csv(out / "samples.csv", counts)
    click.echo(f"{data['total_draws']} draws over {len(counts)} distinct "
               "configurations")
    click.echo(f"wrote {out / 'samples.csv'}")
    if want_records:
        rows = [{"m": row["m"], "n_quantum": row["n_quantum"],
                 "stream": row["stream"]} for row in data["records"]]
        write_jsonl(out / "records.jsonl", rows)
        click.echo(f"wrote {out / 'records.jsonl'}")


@cli.command()
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--corrupt-j", is_flag=True, default=False, hidden=True,
              help="negative control: break the permutation-sum route")
@_common_options
@click.pass_context
def verify(ctx, n, m, epsilon, corrupt_j, config_path, seed, output_dir):
    """Run the cross-model consistency checks; exit 1 on any failure."""
    cfg, _ = _resolve("verify", config_path, n=n, m=m, epsilon=epsilon,
                      seed=seed, output_dir=output_dir)
    payload = {"n": cfg.n, "m": cfg.m, "epsilon": cfg.epsilon,
               "seed": cfg.seed, "corrupt_j": corrupt_j}
    data = _payload_of(_post(ctx.obj["server"], "/v1/verify", payload))
    for row in data["checks"]:
        status = "PASS" if row["pass"] else "FAIL"
        click.echo(f"{status} {row['check']}: max deviation "
                   f"{row['max_deviation']:.3e} (tolerance {row['tolerance']:.1e})")
    out = _out_dir(cfg)
    write_json(out / "verify.json", {"meta": _meta(cfg), **data})
    click.echo(f"wrote {out / 'verify.json'}")
    if not data["all_passed"]:
        sys.exit(1)


@cli.command()
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--r", type=int, default=None)
@click.option("--eps-err", type=float, default=None)
@_common_options
@click.pass_context
def bounds(ctx, n, m, epsilon, r, eps_err, config_path, seed, output_dir):
    """Evaluate every applicable bound at one parameter point."""
    cfg, _ = _resolve("bounds", config_path, fill_m=True, n=n, m=m,
                      epsilon=epsilon, r=r, eps_err=eps_err, seed=seed,
                      output_dir=output_dir)
    payload = {"n": cfg.n, "epsilon": cfg.epsilon, "r": cfg.r,
               "eps_err": cfg.eps_err}
    data = _payload_of(_post(ctx.obj["server"], "/v1/bounds", payload))
    for row in data["reports"]:
        val = "n/a" if row["value"] is None else f"{row['value']:.6g}"
        click.echo(f"{row['bound_name']}: {val} [{row['satisfied']}]")
    out = _out_dir(cfg)
    write_jsonl(out / "bounds.jsonl", data["reports"])
    write_meta(out / "bounds.meta.json", _meta(cfg))
    click.echo(f"wrote {out / 'bounds.jsonl'}")


@cli.command()
@click.option("--param", default=None,
              type=click.Choice(["epsilon", "n", "r"]))
@click.option("--values", default=None,
              help="comma-separated sweep values, e.g. 10,20,40,80")
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--r", type=int, default=None)
@click.option("--eps-err", type=float, default=None)
@click.option("--eps-over-n", type=float, default=None,
              help="when sweeping n, set epsilon = c/n with this c")
@_common_options
@click.pass_context
def sweep(ctx, param, values, n, m, epsilon, r, eps_err, eps_over_n,
          config_path, seed, output_dir):
    """Evaluate the bounds along a parameter sweep and write a CSV."""
    try:
        values_map, extras = _merge("sweep", config_path, n=n, m=m,
                                    epsilon=epsilon, r=r, eps_err=eps_err,
                                    seed=seed, output_dir=output_dir,
                                    param=param, values=values,
                                    eps_over_n=eps_over_n)
    except (ValueError, TypeError) as exc:
        _fail(str(exc), 2)
    param = extras.get("param")
    raw_values = extras.get("values")
    if not param or not raw_values:
        _fail("sweep requires --param and --values", 2)
    try:
        value_list = [float(tok) for tok in str(raw_values).split(",") if tok.strip()]
    except ValueError:
        _fail(f"cannot parse sweep values {raw_values!r}", 2)
    if not value_list:
        _fail("empty sweep value list", 2)
    if param == "n":
        # the swept field needs no base value
        values_map.setdefault("n", int(value_list[0]))
    try:
        cfg = _finalize(values_map, fill_m=True)
    except (ValueError, TypeError) as exc:
        _fail(str(exc), 2)
    payload = {"param": param, "values": value_list, "n": cfg.n,
               "epsilon": cfg.epsilon, "r": cfg.r, "eps_err": cfg.eps_err,
               "eps_over_n": extras.get("eps_over_n")}
    data = _payload_of(_post(ctx.obj["server"], "/v1/sweep", payload))
    out = _out_dir(cfg)
    write_sweep_csv(out / "sweep.csv", param, data["rows"])
    write_meta(out / "sweep.meta.json", _meta(cfg))
    click.echo(f"{len(data['rows'])} sweep points over {param}")
    click.echo(f"wrote {out / 'sweep.csv'}")


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app
    uvicorn.run(app, host=host, port=port)


def main():
    cli(prog_name="noisyboson")


if __name__ == "__main__":
    main()
