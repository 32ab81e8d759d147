"""Shared serialization helpers.

All CSV writers in this package follow the same conventions:

* floats carry 17 significant digits (``%.17g``) so values round-trip
  bit-exactly through text,
* infinite values are written as the literal ``inf``,
* an optional run manifest is embedded as a leading comment line
  ``# manifest: {...}`` with sorted keys and compact separators, and every
  reader skips ``#`` comment lines,
* no timestamps or other environment-dependent content is ever written, so
  re-running a command on the same input produces byte-identical files.

JSON files use the standard ``repr``-based float serialization of the json
module (shortest round-trip form) and embed the manifest under a top-level
``"manifest"`` key instead of a comment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from .errors import MalformedFileError

MANIFEST_PREFIX = "# manifest: "


def fmt_float(x: float) -> str:
    """Format a float with 17 significant digits; infinities become ``inf``."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % float(x)


def parse_float(cell: str) -> float:
    """Parse a CSV cell as a float, raising :class:`ValueError` on junk."""
    return float(cell.strip())


def manifest_comment(manifest: dict[str, Any]) -> str:
    """Render a manifest dict as the deterministic comment line."""
    return MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def read_text_rows(path: str | Path) -> tuple[Optional[dict[str, Any]], list[str]]:
    """Read a text file, splitting off an embedded manifest.

    Returns ``(manifest_or_None, lines)`` where *lines* excludes blank lines
    and all ``#`` comments.
    """
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    manifest = None
    lines: list[str] = []
    for line in raw:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped.startswith(MANIFEST_PREFIX.strip()) and manifest is None:
                payload = stripped[len("# manifest:"):].strip()
                if payload:
                    try:
                        manifest = json.loads(payload)
                    except json.JSONDecodeError as exc:
                        raise MalformedFileError(
                            f"{path}: embedded manifest is not valid JSON: {exc}"
                        ) from exc
            continue
        lines.append(line)
    return manifest, lines


def write_lines(path: str | Path, lines: Iterable[str], manifest: Optional[dict[str, Any]] = None) -> None:
    """Write lines joined by ``\\n``, prefixed with the manifest comment if given."""
    out: list[str] = []
    if manifest is not None:
        out.append(manifest_comment(manifest))
    out.extend(lines)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def dump_json(path: str | Path, payload: dict[str, Any]) -> None:
    """Write a JSON file with sorted keys and a trailing newline."""
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_json(path: str | Path, what: str) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not valid JSON ({what}): {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedFileError(f"{path}: expected a JSON object for {what}")
    return payload


@dataclass
class RunManifest:
    """Sidecar metadata describing where an activation matrix came from.

    All fields are optional at load time; operations that need one (for
    example assembling gap records, which require the train/test scores)
    validate presence themselves.
    """

    model_name: Optional[str] = None
    dataset_name: Optional[str] = None
    epoch: Optional[int] = None
    rho_train: Optional[float] = None
    rho_test: Optional[float] = None

    @classmethod
    def from_dict(cls, payload: dict[str, Any], source: str = "<manifest>") -> "RunManifest":
        def _num(key: str) -> Optional[float]:
            v = payload.get(key)
            if v is None:
                return None
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise MalformedFileError(f"{source}: manifest field {key!r} must be a number")
            return float(v)

        epoch = payload.get("epoch")
        if epoch is not None and (not isinstance(epoch, int) or isinstance(epoch, bool)):
            raise MalformedFileError(f"{source}: manifest field 'epoch' must be an integer")
        for key in ("model_name", "dataset_name"):
            v = payload.get(key)
            if v is not None and not isinstance(v, str):
                raise MalformedFileError(f"{source}: manifest field {key!r} must be a string")
        return cls(
            model_name=payload.get("model_name"),
            dataset_name=payload.get("dataset_name"),
            epoch=epoch,
            rho_train=_num("rho_train"),
            rho_test=_num("rho_test"),
        )

    def to_dict(self) -> dict[str, Any]:
        """Dict with only populated fields, suitable for embedding in outputs."""
        out: dict[str, Any] = {}
        for key in ("model_name", "dataset_name", "epoch", "rho_train", "rho_test"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


def load_sidecar_manifest(csv_path: str | Path) -> Optional[RunManifest]:
    """Load ``<stem>.manifest.json`` next to an activation CSV, if present."""
    csv_path = Path(csv_path)
    sidecar = csv_path.parent / (csv_path.stem + ".manifest.json")
    if not sidecar.exists():
        return None
    payload = load_json(sidecar, "run manifest")
    return RunManifest.from_dict(payload, source=str(sidecar))
