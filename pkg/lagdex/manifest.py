"""A record of the inputs and outputs of one command."""

from __future__ import annotations

import hashlib
import pathlib
from collections.abc import Iterable

from .config.pretty import PrettyModel
from .config.types import IntervalField

MANIFEST_NAME = "manifest.json"


def sha256_file(path: str | pathlib.Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _tool_version() -> str:
    from . import __version__

    return __version__


class FileRecord(PrettyModel, frozen=True):
    path: str
    sha256: str


class RunManifest(PrettyModel):
    """
    Inputs, outputs and settings of a command run.

    No timestamps are recorded, so rerunning a command on the same inputs
    writes an identical manifest.
    """

    command: list[str]
    tool_version: str
    config_paths: list[str] = []
    window: IntervalField | None = None
    inputs: list[FileRecord] = []
    outputs: list[FileRecord] = []

    @classmethod
    def build(
        cls,
        command: list[str],
        out_dir: pathlib.Path,
        outputs: Iterable[pathlib.Path],
        inputs: Iterable[pathlib.Path] = (),
        config_paths: Iterable[pathlib.Path] = (),
        window=None,
    ) -> RunManifest:
        def record(path: pathlib.Path, base: pathlib.Path | None) -> FileRecord:
            path = pathlib.Path(path)
            shown = path
            if base is not None:
                try:
                    shown = path.resolve().relative_to(base.resolve())
                except ValueError:
                    pass
            return FileRecord(path=shown.as_posix(), sha256=sha256_file(path))

        return cls(
            command=list(command),
            tool_version=_tool_version(),
            config_paths=[pathlib.Path(p).as_posix() for p in config_paths],
            window=window,
            inputs=sorted(
                (record(p, None) for p in set(map(pathlib.Path, inputs))),
                key=lambda r: r.path,
            ),
            outputs=sorted(
                (record(p, out_dir) for p in outputs), key=lambda r: r.path
            ),
        )

    def write(self, out_dir: str | pathlib.Path) -> pathlib.Path:
        path = pathlib.Path(out_dir) / MANIFEST_NAME
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def verify(self, out_dir: str | pathlib.Path) -> list[str]:
        """Paths of outputs whose content no longer matches the manifest."""
        out_dir = pathlib.Path(out_dir)
        changed = []
        for entry in self.outputs:
            path = out_dir / entry.path
            if not path.exists() or sha256_file(path) != entry.sha256:
                changed.append(entry.path)
        return changed
