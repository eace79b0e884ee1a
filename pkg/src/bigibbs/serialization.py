"""File formats: JSONL sample streams, atomic JSON reports, CSV tables.

All writers are deterministic byte for byte given the same data: keys are
sorted, floats use their shortest round-trip representation, and files are
replaced atomically so partially written outputs never survive a crash.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, Sequence

from .geometry import TwoComponentConfiguration


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: str, obj) -> None:
    write_text_atomic(path, dumps_json(obj))


def save_samples_jsonl(path: str, samples: Iterable[TwoComponentConfiguration]) -> None:
    """One two-species configuration per line: {"plus": [...], "minus": [...]}."""
    lines = [
        json.dumps(s.to_dict(), sort_keys=True, separators=(",", ":")) for s in samples
    ]
    write_text_atomic(path, "\n".join(lines) + ("\n" if lines else ""))


def load_samples_jsonl(path: str) -> list[TwoComponentConfiguration]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(TwoComponentConfiguration.from_dict(json.loads(line)))
    return out


def write_csv_atomic(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    write_text_atomic(path, "\n".join(lines) + "\n")
