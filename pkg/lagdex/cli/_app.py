from __future__ import annotations

import functools
import json
import logging
import pathlib
from dataclasses import dataclass, field

import pandas as pd
import typer
from pydantic import ValidationError
from rich.console import Console

from lagdex._logging import log_to_console, log_to_file
from lagdex.config import Config
from lagdex.exceptions import ConfigError, LagdexError
from lagdex.manifest import RunManifest

app = typer.Typer(help="lagdex command line interface", no_args_is_help=True)

stderr = Console(stderr=True)
stdout = Console(highlight=False)

logger = logging.getLogger("lagdex.cli")

EXECUTION_OPTIONS = frozenset({"workers", "verbose", "log_file", "progress"})
"""Options that change how a command runs but never what it writes."""


@dataclass
class RunContext:
    config_files: list[pathlib.Path] = field(default_factory=list)
    out_dir: pathlib.Path | None = None
    workers: int | None = None
    seed: int = 0
    inputs: list[pathlib.Path] = field(default_factory=list)
    outputs: list[pathlib.Path] = field(default_factory=list)
    _config: Config | None = None

    def config(self) -> Config:
        if self._config is None:
            if not self.config_files:
                raise ConfigError("no configuration given, use --config")
            try:
                self._config = Config.from_yaml(self.config_files)
            except FileNotFoundError as err:
                raise ConfigError(f"cannot read config: {err}") from err
        return self._config

    def output_dir(self) -> pathlib.Path:
        if self.out_dir is not None:
            out = self.out_dir
        elif self.config_files:
            out = self.config().outputs.out_dir
        else:
            out = pathlib.Path("lagdex-output")
        out.mkdir(parents=True, exist_ok=True)
        return out

    def n_workers(self) -> int:
        if self.workers is not None:
            return max(self.workers, 1)
        if self.config_files:
            return self.config().search.workers()
        return 1

    def float_format(self) -> str:
        if self.config_files:
            return self.config().outputs.float_format
        return "%.10g"

    def input_files(self) -> list[pathlib.Path]:
        files = [*self.config_files, *self.inputs]
        if self.config_files:
            config = self.config()
            sources = [config.target, *config.candidates.values()]
            files += [config.resolve_path(s.path) for s in sources if s.path]
        return files

    def write_json(self, name: str, text: str) -> pathlib.Path:
        path = self.output_dir() / name
        path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
        self.outputs.append(path)
        return path

    def write_data(self, name: str, payload) -> pathlib.Path:
        return self.write_json(name, json.dumps(payload, indent=2))

    def write_frame(self, name: str, frame: pd.DataFrame) -> pathlib.Path:
        path = self.output_dir() / name
        frame.to_csv(
            path, index=False, lineterminator="\n", float_format=self.float_format()
        )
        self.outputs.append(path)
        return path

    def write_text(self, name: str, text: str) -> pathlib.Path:
        return self.write_json(name, text)

    def finish(self, ctx: typer.Context, window=None) -> pathlib.Path:
        """Write the manifest describing this run."""
        params = {**ctx.parent.params, **ctx.params} if ctx.parent else ctx.params
        command = [ctx.info_name or ""]
        for key in sorted(params.keys() - EXECUTION_OPTIONS):
            value = params[key]
            if isinstance(value, list | tuple):
                value = ",".join(str(v) for v in value)
            command.append(f"{key}={value}")
        manifest = RunManifest.build(
            command=command,
            out_dir=self.output_dir(),
            outputs=self.outputs,
            inputs=self.input_files(),
            config_paths=self.config_files,
            window=window,
        )
        return manifest.write(self.output_dir())


def run_context(ctx: typer.Context) -> RunContext:
    obj = ctx.find_object(RunContext)
    if obj is None:
        obj = ctx.ensure_object(RunContext)
    return obj


def handle_errors(func):
    """Report lagdex errors on standard error and exit with their code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as err:
            stderr.print(f"[bold red]configuration error:[/bold red] {err}")
            raise typer.Exit(code=ConfigError.exit_code) from err
        except LagdexError as err:
            logger.debug("command failed", exc_info=True)
            stderr.print(f"[bold red]error:[/bold red] {err}")
            raise typer.Exit(code=err.exit_code) from err

    return wrapper


def split_names(text: str, count: int = 2) -> list[str]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ConfigError(f"expected {count} comma separated names, got {text!r}")
    return parts


def split_ints(text: str, count: int = 2) -> list[int]:
    try:
        return [int(p) for p in split_names(text, count)]
    except ValueError as err:
        raise ConfigError(
            f"expected {count} comma separated integers, got {text!r}"
        ) from err


@app.callback()
def main(
    ctx: typer.Context,
    config: list[pathlib.Path] = typer.Option(  # noqa: B008
        None,
        "-c",
        "--config",
        help="Configuration file(s); later files override earlier ones.",
    ),
    out_dir: pathlib.Path = typer.Option(  # noqa: B008
        None, "--out-dir", help="Directory for outputs and manifest.json."
    ),
    workers: int = typer.Option(None, "--workers", help="Parallel worker processes."),
    seed: int = typer.Option(0, "--seed", help="Seed for synthetic data."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress."),
    log_file: pathlib.Path = typer.Option(  # noqa: B008
        None, "--log-file", help="Also write log messages to this file."
    ),
):
    """Lagged index models of stock prices."""
    if verbose:
        log_to_console(logging.INFO)
    if log_file is not None:
        log_to_file(log_file, logging.INFO)
    ctx.obj = RunContext(
        config_files=list(config or []),
        out_dir=out_dir,
        workers=workers,
        seed=seed,
    )
