"""The whole pipeline from the bundled config, as the command line runs it.

Equivalent to ``hmdemand run demo -o <dir>``. Running it twice gives the same
bytes.
"""

import hashlib
import sys
import tempfile
from pathlib import Path

from hmdemand.cli import demo_config_path, main

print(demo_config_path().read_text())

digests = []
with tempfile.TemporaryDirectory() as tmp:
    for run in ("first", "second"):
        out = Path(tmp) / run
        if main(["run", "demo", "-o", str(out)]) != 0:
            sys.exit(1)
        h = hashlib.sha256()
        for p in sorted(out.rglob("*")):
            if p.is_file():
                h.update(p.relative_to(out).as_posix().encode())
                h.update(p.read_bytes())
        digests.append(h.hexdigest())
    print((Path(tmp) / "first" / "hm_summary.txt").read_text(encoding="utf-8"))

print("identical reruns:", digests[0] == digests[1])
