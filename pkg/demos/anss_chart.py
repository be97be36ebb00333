"""d3 and collapse through stem 30; writes chart.svg and homotopy.json to the given directory."""
import json
import sys
from pathlib import Path

from tqmf.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "anss_out")
code = main(["anss", "--stem-max", "30", "--verify-n-max", "8", "-o", str(out)])
homotopy = json.loads((out / "homotopy.json").read_text())
for stem in homotopy["stems"]:
    print(f"pi_{stem['stem']:<2d} = {stem['group']}")
print("detected:", homotopy["detected"])
sys.exit(code)
