"""report bundle: data files, figures and a manifest with digests

data files are written byte-deterministically: floats use repr (shortest
round trip), JSON keys are sorted, CSV lines end with \\n. the manifest
carries timings and versions, so it is the one file allowed to differ
between two runs of the same config.
"""
import csv
import hashlib
import io
import json
import math
import os
import threading
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.utils.errors import ValidationError

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"


def plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, complex as [re, im], inf/nan as None"""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(float(value.real)), plain(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def cell(value: Any) -> str:
    # one CSV field
    value = plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class ReportBundle:
    # one output directory per run, files are written by this object only
    def __init__(self, out_dir: str, seed: int):
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.lock = threading.Lock()
        self.files: List[Dict[str, str]] = []
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ValidationError(f"cannot create output directory {out_dir}: {exc.strerror or exc}",
                                  {"out_dir": str(out_dir)}) from exc
        if not os.access(self.out_dir, os.W_OK):
            raise ValidationError(f"output directory {out_dir} is not writable", {"out_dir": str(out_dir)})

    def _record(self, name: str, kind: str) -> Path:
        path = self.out_dir / name
        with self.lock:
            self.files = [f for f in self.files if f["name"] != name]
            self.files.append({"name": name, "kind": kind})
        return path

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Any]) -> Path:
        """rows are dicts keyed by column or plain sequences"""
        path = self._record(name, "csv")
        buf = io.StringIO()
        buf.write(f"# seed: {self.seed}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(c) for c in columns]
            writer.writerow([cell(v) for v in row])
        path.write_text(buf.getvalue(), encoding="utf-8")
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._record(name, "json")
        body = {"schema_version": SCHEMA_VERSION, "seed": self.seed}
        body.update(plain(payload))
        path.write_text(json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
        return path

    def write_svg(self, name: str, fig) -> Path:
        from src.cli.figures import save_svg

        path = self._record(name, "svg")
        save_svg(fig, path)
        return path

    def write_manifest(self, config: Dict[str, Any], timings: Dict[str, float], versions: Dict[str, str],
                       status: str, diagnostics: Optional[Dict[str, Any]] = None,
                       summary: Optional[Dict[str, Any]] = None) -> Path:
        entries = []
        for f in sorted(self.files, key=lambda f: f["name"]):
            path = self.out_dir / f["name"]
            if path.exists():
                entries.append({"name": f["name"], "kind": f["kind"], "sha256": digest(path),
                                "bytes": path.stat().st_size})
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "status": status,
            "seed": self.seed,
            "config": plain(config),
            "versions": versions,
            "timings": plain(timings),
            "files": entries,
            "diagnostics": plain(diagnostics or {}),
            "summary": plain(summary or {}),
        }
        path = self.out_dir / MANIFEST
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
        return path


def verify_manifest(out_dir: str) -> List[str]:
    """names of files whose digest no longer matches the manifest"""
    root = Path(out_dir)
    manifest = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    return [e["name"] for e in manifest["files"]
            if not (root / e["name"]).exists() or digest(root / e["name"]) != e["sha256"]]
