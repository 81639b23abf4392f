"""Thin command-line client for the analysis service.

Each command loads a flat JSON config, resolves any local files (datasets,
spec files) into an inline request, posts it to the service, and writes the
response to the output directory. Without --server the service runs
in-process over an ASGI transport, so the CLI works standalone; with
--server it talks to a remote instance over HTTP.

Exit codes: 0 success, 2 usage/config error, 3 data/runtime error.
All output files are written atomically (temp file + rename) with canonical
JSON/CSV formatting, so identical config + seed reproduces identical bytes.
"""

import asyncio
import csv
import io
import json
import os
import sys
from pathlib import Path

import click
import httpx

from .core import ColumnSchema, Dataset, load_dataset, write_dataset
from .errors import DataError

EXIT_CONFIG = 2
EXIT_DATA = 3


class CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        self.exit_code = exit_code
        super().__init__(message)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        if server is None:
            from .service.app import app

            async def call():
                transport = httpx.ASGITransport(app=app)
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://fairshift.internal", timeout=None
                ) as client:
                    return await client.post(path, json=payload)

            response = asyncio.run(call())
        else:
            with httpx.Client(base_url=server, timeout=600.0) as client:
                response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliError(EXIT_DATA, f"service request failed: {exc}") from exc
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json()
    except ValueError:
        detail = response.text
    code = EXIT_CONFIG if response.status_code == 422 else EXIT_DATA
    raise CliError(code, f"service error {response.status_code}: {detail}")


def _load_config(path: str) -> tuple[dict, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise CliError(EXIT_CONFIG, f"config {path} must be a JSON object")
    return config, raw


def _resolve_out(out: str | None, config: dict) -> Path:
    target = out or config.get("out")
    if not target:
        raise CliError(EXIT_CONFIG, "no output directory: pass --out or set 'out' in the config")
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _effective_seed(seed: int | None, config: dict) -> int | None:
    if seed is not None:
        return seed
    value = config.get("seed")
    if value is None:
        return None
    if not isinstance(value, int) or value < 0:
        raise CliError(EXIT_CONFIG, f"config seed must be a nonnegative integer, got {value!r}")
    return value


def _build_source(config: dict, seed: int | None, default_normalize: bool = True) -> dict:
    """Turn config keys into the service's dataset source payload, loading
    local files on the client side."""
    source: dict = {"normalize": bool(config.get("normalize", default_normalize))}
    kinds = [k for k in ("dataset_path", "builtin", "spec_path") if config.get(k)]
    if len(kinds) != 1:
        raise CliError(
            EXIT_CONFIG, "config needs exactly one of dataset_path / builtin / spec_path"
        )
    kind = kinds[0]
    if kind == "dataset_path":
        schema = config.get("schema")
        if not isinstance(schema, dict):
            raise CliError(EXIT_CONFIG, "dataset_path requires a 'schema' object")
        try:
            cols = ColumnSchema(
                schema["group_col"], schema["label_col"], tuple(schema["feature_cols"])
            )
        except (KeyError, TypeError) as exc:
            raise CliError(
                EXIT_CONFIG, f"schema needs group_col, label_col, feature_cols: {exc}"
            ) from exc
        path = config["dataset_path"]
        if not os.path.exists(path):
            raise CliError(EXIT_DATA, f"dataset not found: {path}")
        try:
            ds = load_dataset(path, cols)
        except DataError as exc:
            raise CliError(EXIT_DATA, f"cannot load {path}: {exc}") from exc
        source["dataset"] = {
            "feature_names": ds.feature_names,
            "groups": [int(v) for v in ds.groups],
            "labels": [int(v) for v in ds.labels],
            "features": [[float(v) for v in row] for row in ds.features],
        }
    elif kind == "builtin":
        source["builtin"] = config["builtin"]
        if config.get("sample_size") is not None:
            source["sample_size"] = config["sample_size"]
        if seed is not None:
            source["seed"] = seed
    else:
        spec_path = config["spec_path"]
        if not os.path.exists(spec_path):
            raise CliError(EXIT_DATA, f"spec file not found: {spec_path}")
        try:
            spec = json.loads(Path(spec_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_CONFIG, f"cannot parse spec {spec_path}: {exc}") from exc
        spec_kind = spec.pop("kind", None)
        if spec_kind not in ("mixture", "index"):
            raise CliError(EXIT_CONFIG, "spec file needs \"kind\": \"mixture\" or \"index\"")
        if seed is not None:
            spec["seed"] = seed
        source[spec_kind] = spec
    return source


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _write_json(path: Path, obj, quiet: bool) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    _atomic_write(path, text.encode("utf-8"))
    _note(path, quiet)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list], quiet: bool) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    _atomic_write(path, buf.getvalue().encode("utf-8"))
    _note(path, quiet)


def _echo_config(out: Path, raw: bytes, quiet: bool) -> None:
    _atomic_write(out / "config.json", raw)
    _note(out / "config.json", quiet)


def _note(path: Path, quiet: bool) -> None:
    if not quiet:
        click.echo(f"wrote {path}")


def common_options(fn):
    fn = click.option("--config", "config_path", required=True, help="Flat JSON run config.")(fn)
    fn = click.option("--out", help="Output directory (overrides config 'out').")(fn)
    fn = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                      help="Override the config seed.")(fn)
    fn = click.option("--quiet", is_flag=True, help="Suppress progress output.")(fn)
    fn = click.option("--server", default=None, help="Remote service URL (default: in-process).")(fn)
    return fn


@click.group()
@click.version_option()
def main() -> None:
    """Strategic-manipulation fairness analyses."""


def _run(fn):
    try:
        fn()
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)


@main.command()
@common_options
def synth(config_path, out, seed, quiet, server):
    """Generate a synthetic dataset and write it as dataset.csv."""

    def go():
        config, raw = _load_config(config_path)
        out_dir = _resolve_out(out, config)
        source = _build_source(config, _effective_seed(seed, config), default_normalize=False)
        result = _post(server, "/synthetic/generate", {"source": source})
        payload = result["dataset"]
        ds = Dataset(
            payload["groups"], payload["labels"], payload["features"], payload["feature_names"]
        )
        tmp = out_dir / f".dataset.csv.tmp-{os.getpid()}"
        write_dataset(tmp, ds)
        os.replace(tmp, out_dir / "dataset.csv")
        _note(out_dir / "dataset.csv", quiet)
        _echo_config(out_dir, raw, quiet)

    _run(go)


def _common_analysis_payload(config: dict, seed: int | None) -> dict:
    payload = {"source": _build_source(config, seed)}
    for key in ("feature", "metric", "alpha", "grid_size", "bins"):
        if key in config:
            payload[key] = config[key]
    return payload


@main.command("sweep-threshold")
@common_options
def sweep_threshold(config_path, out, seed, quiet, server):
    """Sweep thresholds over one feature; write threshold_sweep.csv and
    summary.json."""

    def go():
        config, raw = _load_config(config_path)
        out_dir = _resolve_out(out, config)
        payload = _common_analysis_payload(config, _effective_seed(seed, config))
        result = _post(server, "/threshold/sweep", payload)
        rows = [[r["theta"], r["error"], r["unfairness"]] for r in result["rows"]]
        _write_csv(out_dir / "threshold_sweep.csv", ["theta", "error", "unfairness"], rows, quiet)
        summary = {k: v for k, v in result.items() if k != "rows"}
        _write_json(out_dir / "summary.json", summary, quiet)
        _echo_config(out_dir, raw, quiet)

    _run(go)


@main.command("sweep-budget")
@common_options
def sweep_budget(config_path, out, seed, quiet, server):
    """Sweep manipulation budgets for a base/fair pair; write
    budget_sweep.csv and reversal.json."""

    def go():
        config, raw = _load_config(config_path)
        out_dir = _resolve_out(out, config)
        eff_seed = _effective_seed(seed, config)
        payload = _common_analysis_payload(config, eff_seed)
        payload.pop("bins", None)
        if "mode" in config:
            payload["mode"] = config["mode"]
        payload["cost_kind"] = config.get("cost_kind", "abs_power")
        if "cost_exponent" in config:
            payload["cost_exponent"] = config["cost_exponent"]
        try:
            payload["budgets"] = {
                "min": config["budget_min"],
                "max": config["budget_max"],
                "count": config["budget_count"],
                "log": bool(config.get("budget_log", False)),
            }
        except KeyError as exc:
            raise CliError(EXIT_CONFIG, f"config missing budget grid key: {exc}")
        training = {}
        for key in ("epochs", "step"):
            if key in config:
                training[key] = config[key]
        if eff_seed is not None:
            training["seed"] = eff_seed
        if training:
            payload["training"] = training
        result = _post(server, "/budget/sweep", payload)
        rows = [
            [r["budget"], r["error_C"], r["error_F"], r["unfair_C"], r["unfair_F"]]
            for r in result["rows"]
        ]
        _write_csv(
            out_dir / "budget_sweep.csv",
            ["budget", "error_C", "error_F", "unfair_C", "unfair_F"],
            rows,
            quiet,
        )
        reversal = {k: v for k, v in result.items() if k != "rows"}
        reversal = {**reversal.pop("reversal"), **reversal}
        _write_json(out_dir / "reversal.json", reversal, quiet)
        _echo_config(out_dir, raw, quiet)

    _run(go)


@main.command("check-conditions")
@common_options
def check_conditions(config_path, out, seed, quiet, server):
    """Check the single-crossing and unimodality conditions; write
    conditions.json."""

    def go():
        config, raw = _load_config(config_path)
        out_dir = _resolve_out(out, config)
        payload = {"source": _build_source(config, _effective_seed(seed, config))}
        for key in ("metric", "bins", "grid_size", "feature"):
            if key in config:
                payload[key] = config[key]
        result = _post(server, "/conditions/check", payload)
        _write_json(out_dir / "conditions.json", result, quiet)
        _echo_config(out_dir, raw, quiet)

    _run(go)


@main.command()
@click.argument("run_dirs", nargs=-1, type=click.Path())
@click.option("--config", "config_path", default=None, help="Optional config with a 'runs' list.")
@click.option("--out", required=True, help="Output directory.")
@click.option("--quiet", is_flag=True)
@click.option("--server", default=None)
def report(run_dirs, config_path, out, quiet, server):
    """Aggregate completed run directories into report.json / report.csv."""

    def go():
        dirs = list(run_dirs)
        raw = None
        if config_path:
            config, raw = _load_config(config_path)
            dirs += [str(d) for d in config.get("runs", [])]
        if not dirs:
            raise CliError(EXIT_CONFIG, "no run directories given")
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        runs = []
        for d in dirs:
            base = Path(d)
            if not base.is_dir():
                raise CliError(EXIT_DATA, f"run directory not found: {d}")
            entry = {"name": base.name, "config": {}, "summary": None, "reversal": None}
            try:
                for key, fname in (
                    ("config", "config.json"),
                    ("summary", "summary.json"),
                    ("reversal", "reversal.json"),
                ):
                    f = base / fname
                    if f.exists():
                        entry[key] = json.loads(f.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError(EXIT_DATA, f"unreadable run directory {d}: {exc}") from exc
            if entry["summary"] is None and entry["reversal"] is None:
                raise CliError(EXIT_DATA, f"run directory {d} has no summary.json/reversal.json")
            runs.append(entry)
        result = _post(server, "/report/aggregate", {"runs": runs})
        _write_json(out_dir / "report.json", result, quiet)
        header = [
            "run", "mode", "feature", "metric", "theta_C", "theta_F",
            "selective", "reversal_detected", "reversal_magnitude",
        ]
        rows = [
            [
                r["run"], r["mode"], r["feature"], r["metric"], r["theta_c"], r["theta_f"],
                r["selective"], r["reversal_detected"], r["reversal_magnitude"],
            ]
            for r in result["rows"]
        ]
        _write_csv(out_dir / "report.csv", header, rows, quiet)
        if raw is not None:
            _echo_config(out_dir, raw, quiet)

    _run(go)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8321, type=int)
def serve(host, port):
    """Run the analysis service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
