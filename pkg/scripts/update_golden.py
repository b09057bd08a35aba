#!/usr/bin/env python3
"""Re-run the golden config and refresh golden/digests.json.

The pinned digests cover metrics.json, confusion.csv, and every SVG the
run produces. Regenerate only when an intentional behavior change shifts
the golden run's outputs.
"""

import hashlib
import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from oncograde.cli import main  # noqa: E402

PINNED = ("metrics.json", "confusion.csv")


def run() -> None:
    golden = ROOT / "golden"
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        code = main(["train", "--config", str(golden / "config.json"), "--output-dir", str(out)])
        if code != 0:
            raise SystemExit(f"golden run failed with exit code {code}")
        digests = {}
        for path in sorted(out.iterdir()):
            if path.name in PINNED or path.suffix == ".svg":
                digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    (golden / "digests.json").write_text(json.dumps(digests, indent=2) + "\n", encoding="utf-8")
    print(f"pinned {len(digests)} digests -> {golden / 'digests.json'}")


if __name__ == "__main__":
    run()
