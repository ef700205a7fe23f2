"""Regenerate the committed golden artifacts under tests/goldens/.

Run from the repository root:  python3 tests/regen_goldens.py
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from pipeline_helpers import ARTIFACTS, GOLDENS, run_pipeline


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        run_pipeline(root)
        if GOLDENS.exists():
            shutil.rmtree(GOLDENS)
        GOLDENS.mkdir(parents=True)
        for rel in ARTIFACTS:
            source = root / rel
            target = GOLDENS / rel.replace("/", "__")
            target.write_bytes(source.read_bytes())
    print(f"{len(ARTIFACTS)} goldens written to {GOLDENS}")


if __name__ == "__main__":
    main()
