"""Command-line client for the propagation service.

Each subcommand assembles a JSON request, sends it to the service (an
in-process app instance by default, or a remote base URL given with
--url) and writes the result as CSV with the resolved configuration
echoed in `# key = value` header comments.  Option precedence: explicit
flags beat entries in a key=value config file, which beat the service
defaults.
"""

import asyncio
import base64

import click
import httpx
import numpy as np

from . import __version__
from .bench import BenchReport
from .fileio import (
    read_snapshots,
    write_bench_reports,
    write_rows,
    write_rule,
    write_series,
)
from .propagate import FieldSeries
from .quadrature import LebedevRule

__all__ = ["main"]


def _request(url, method, path, payload=None):
    """One HTTP round trip; in-process ASGI when no URL is configured."""
    if url is None:
        from .service import app

        async def _go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://service", timeout=None
            ) as client:
                return await client.request(method, path, json=payload)

        response = asyncio.run(_go())
    else:
        with httpx.Client(base_url=url, timeout=None) as client:
            response = client.request(method, path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"service returned {response.status_code}: {detail}")
    return response.json()


def _parse_floats(text):
    return tuple(float(part) for part in text.replace(",", " ").split())


def _parse_ints(text):
    return tuple(int(part) for part in text.replace(",", " ").split())


def _parse_normal(text):
    if text.strip().lower() in ("", "none"):
        return None
    parts = _parse_floats(text)
    if len(parts) != 3:
        raise click.ClickException(f"normal needs three components, got {text!r}")
    return parts


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise click.ClickException(f"expected a boolean, got {text!r}")


def read_config_file(path):
    """key = value lines; '#' starts a comment; values stay as text."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.ClickException(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _resolve(flags, config_path, coerce):
    """Merge flag values over config-file entries; missing keys are
    left out so the service defaults apply."""
    file_cfg = read_config_file(config_path) if config_path else {}
    unknown = set(file_cfg) - set(coerce)
    if unknown:
        raise click.ClickException(
            f"{config_path}: unknown keys: {', '.join(sorted(unknown))}"
        )
    out = {}
    for key, parser in coerce.items():
        if flags.get(key) is not None:
            out[key] = flags[key]
        elif key in file_cfg:
            try:
                out[key] = parser(file_cfg[key])
            except ValueError as exc:
                raise click.ClickException(f"{config_path}: key {key}: {exc}")
    return out


def _echo_header(experiment, config):
    """Flatten the service's resolved-config echo for CSV comments."""
    header = {"experiment": experiment}
    for key, value in config.items():
        if value is None:
            value = "none" if key == "normal" else "auto"
        elif isinstance(value, (list, tuple)):
            value = " ".join(
                "{:.17g}".format(v) if isinstance(v, float) else str(v) for v in value
            )
        header[key] = value
    return header


_STUDY_COERCE = {
    "a": float,
    "rho": float,
    "theta": float,
    "phi": float,
    "normal": _parse_normal,
    "band": int,
    "node_count": int,
    "psi_count": int,
    "gamma_count": int,
    "order": int,
    "steps": int,
    "duration": float,
    "c": float,
}


def _study_options(fn):
    options = [
        click.option("--a", type=float, default=None, help="surface radius"),
        click.option("--rho", type=float, default=None, help="field-point radius"),
        click.option("--theta", type=float, default=None, help="field-point colatitude"),
        click.option("--phi", type=float, default=None, help="field-point azimuth"),
        click.option(
            "--normal",
            type=str,
            default=None,
            callback=lambda ctx, param, v: None if v is None else _parse_normal(v),
            help="normal-derivative direction 'nx,ny,nz', or 'none'",
        ),
        click.option("--band", type=int, default=None, help="max harmonic degree"),
        click.option(
            "--nodes", "node_count", type=int, default=None,
            help="surface node count [default: smallest rule of order >= 2 band]",
        ),
        click.option(
            "--psi-count", type=int, default=None, help="elevation rule length"
        ),
        click.option(
            "--gamma-count", type=int, default=None, help="azimuth grid length"
        ),
        click.option("--order", type=int, default=None, help="stencil order K"),
        click.option("--steps", type=int, default=None, help="record length n_t"),
        click.option("--duration", type=float, default=None, help="record duration"),
        click.option("--c", type=float, default=None, help="wave speed"),
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False),
            default=None,
            help="key = value file supplying defaults",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(__version__)
@click.option("--url", default=None, help="remote service base URL; default in-process")
@click.pass_context
def main(ctx, url):
    """Exterior acoustic fields from sphere-surface records."""
    ctx.obj = url


@main.command()
@_study_options
@click.option("--steps-list", type=str, default=None, help="record lengths, comma-separated")
@click.option("--orders", type=str, default=None, help="stencil orders, comma-separated")
@click.option("--out", type=click.Path(dir_okay=False), default="convergence.csv", show_default=True)
@click.pass_context
def convergence(ctx, config_path, out, steps_list, orders, **flags):
    """Error against record resolution for several stencil orders."""
    coerce = dict(_STUDY_COERCE, steps_list=_parse_ints, orders=_parse_ints)
    flags["steps_list"] = None if steps_list is None else _parse_ints(steps_list)
    flags["orders"] = None if orders is None else _parse_ints(orders)
    payload = _resolve(flags, config_path, coerce)
    result = _request(ctx.obj, "POST", "/convergence", payload)
    write_rows(
        out,
        ("steps", "order", "eps_p", "eps_pn"),
        [(r["steps"], r["order"], r["eps_p"], r["eps_pn"]) for r in result["rows"]],
        header=_echo_header("convergence", result["config"]),
    )
    click.echo(f"wrote {out}")


@main.command()
@_study_options
@click.option("--bands", type=str, default=None, help="harmonic degrees, comma-separated")
@click.option("--out", type=click.Path(dir_okay=False), default="nsph.csv", show_default=True)
@click.pass_context
def nsph(ctx, config_path, out, bands, **flags):
    """Error against the harmonic band limit at fixed resolution."""
    coerce = dict(_STUDY_COERCE, bands=_parse_ints)
    flags["bands"] = None if bands is None else _parse_ints(bands)
    payload = _resolve(flags, config_path, coerce)
    result = _request(ctx.obj, "POST", "/nsph", payload)
    write_rows(
        out,
        ("band", "node_count", "eps_p", "eps_pn"),
        [
            (r["band"], r["node_count"], r["eps_p"], r["eps_pn"])
            for r in result["rows"]
        ],
        header=_echo_header("nsph", result["config"]),
    )
    click.echo(f"wrote {out}")


@main.command("radius-sweep")
@_study_options
@click.option("--radii", type=str, default=None, help="field-point radii, comma-separated")
@click.option("--bands", type=str, default=None, help="harmonic degrees, comma-separated")
@click.option("--out", type=click.Path(dir_okay=False), default="radius_sweep.csv", show_default=True)
@click.pass_context
def radius_sweep(ctx, config_path, out, radii, bands, **flags):
    """Error against field-point radius for several band limits."""
    coerce = dict(_STUDY_COERCE, radii=_parse_floats, bands=_parse_ints)
    flags["radii"] = None if radii is None else _parse_floats(radii)
    flags["bands"] = None if bands is None else _parse_ints(bands)
    payload = _resolve(flags, config_path, coerce)
    result = _request(ctx.obj, "POST", "/radius-sweep", payload)
    write_rows(
        out,
        ("band", "node_count", "rho", "eps_p"),
        [
            (r["band"], r["node_count"], r["rho"], r["eps_p"])
            for r in result["rows"]
        ],
        header=_echo_header("radius-sweep", result["config"]),
    )
    click.echo(f"wrote {out}")


_BENCH_COERCE = {
    "node_count": int,
    "band": int,
    "order": int,
    "steps": int,
    "dt": float,
    "c": float,
    "rho": float,
    "theta": float,
    "phi": float,
    "ramp_fraction": float,
    "seed": int,
    "repeats": int,
    "source_counts": _parse_ints,
    "single_thread": _parse_bool,
}


@main.command()
@click.option("--nodes", "node_count", type=int, default=None, help="surface node count")
@click.option("--band", type=int, default=None)
@click.option("--order", type=int, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--dt", type=float, default=None)
@click.option("--c", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--phi", type=float, default=None)
@click.option("--ramp-fraction", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--repeats", type=int, default=None)
@click.option("--source-counts", type=str, default=None, help="comma-separated")
@click.option("--multi-thread", "single_thread", flag_value=False, default=None,
              help="let the BLAS use all cores during timing")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default="breakeven.csv", show_default=True)
@click.pass_context
def breakeven(ctx, config_path, out, source_counts, **flags):
    """Time direct summation against the operator path."""
    flags["source_counts"] = (
        None if source_counts is None else _parse_ints(source_counts)
    )
    payload = _resolve(flags, config_path, _BENCH_COERCE)
    result = _request(ctx.obj, "POST", "/breakeven", payload)
    reports = [BenchReport(**row) for row in result["reports"]]
    write_bench_reports(out, reports, header=_echo_header("breakeven", result["config"]))
    for report in reports:
        ratio = "no-break-even" if report.n_f is None else (
            "{:.17g}".format(report.n_f / report.node_count)
        )
        click.echo(f"n_s={report.n_s}: n_f/nodes = {ratio}")
    click.echo(f"wrote {out}")


_PROPAGATE_COERCE = {
    key: value
    for key, value in _STUDY_COERCE.items()
    if key not in ("steps", "duration")
}
_PROPAGATE_COERCE["dt"] = float


@main.command()
@click.option("--a", type=float, default=None, help="surface radius")
@click.option("--rho", type=float, default=None, help="field-point radius")
@click.option("--theta", type=float, default=None, help="field-point colatitude")
@click.option("--phi", type=float, default=None, help="field-point azimuth")
@click.option(
    "--normal",
    type=str,
    default=None,
    callback=lambda ctx, param, v: None if v is None else _parse_normal(v),
    help="normal-derivative direction 'nx,ny,nz', or 'none'",
)
@click.option("--band", type=int, default=None, help="max harmonic degree")
@click.option("--nodes", "node_count", type=int, default=None,
              help="expected surface node count")
@click.option("--psi-count", type=int, default=None, help="elevation rule length")
@click.option("--gamma-count", type=int, default=None, help="azimuth grid length")
@click.option("--order", type=int, default=None, help="stencil order K")
@click.option("--dt", type=float, default=None, help="record time step")
@click.option("--c", type=float, default=None, help="wave speed")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key = value file supplying defaults")
@click.option("--snapshots", "snapshot_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="surface record CSV (step, node, p, dpdn)")
@click.option("--load-op", type=click.Path(exists=True, dir_okay=False), default=None,
              help="reuse a saved operator instead of assembling one")
@click.option("--save-op", type=click.Path(dir_okay=False), default=None,
              help="write the operator used to this path")
@click.option("--out", type=click.Path(dir_okay=False), default="series.csv", show_default=True)
@click.pass_context
def propagate(ctx, config_path, out, snapshot_path, load_op, save_op, **flags):
    """Propagate a surface record from file to one field point."""
    try:
        sigma, sigma_n = read_snapshots(snapshot_path)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    payload = _resolve(flags, config_path, _PROPAGATE_COERCE)
    payload["sigma"] = sigma.tolist()
    payload["sigma_n"] = sigma_n.tolist()
    if load_op is not None:
        with open(load_op, "rb") as fh:
            payload["operator_b64"] = base64.b64encode(fh.read()).decode()
    if save_op is not None:
        payload["return_operator"] = True
    result = _request(ctx.obj, "POST", "/propagate", payload)
    if save_op is not None:
        with open(save_op, "wb") as fh:
            fh.write(base64.b64decode(result["operator_b64"]))
    series = FieldSeries(
        dt=result["dt"],
        start=result["start"],
        p=np.asarray(result["p"]),
        pn=None if result["pn"] is None else np.asarray(result["pn"]),
        valid=slice(result["valid"][0], result["valid"][1]),
    )
    write_series(out, series, header=_echo_header("propagate", result["config"]))
    click.echo(f"wrote {out}")


@main.command("dump-rule")
@click.argument("nodes", type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="output CSV path [default: rule_<nodes>.csv]")
@click.pass_context
def dump_rule(ctx, nodes, out):
    """Write one quadrature rule as CSV rows (theta, phi, weight)."""
    result = _request(ctx.obj, "GET", f"/rules/{nodes}")
    rule = LebedevRule(
        order=result["order"],
        theta=np.asarray(result["theta"]),
        phi=np.asarray(result["phi"]),
        weights=np.asarray(result["weight"]),
    )
    path = out if out is not None else f"rule_{nodes}.csv"
    write_rule(path, rule)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
