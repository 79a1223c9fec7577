"""
A short fuzzing campaign
========================

Run 40 scenarios of the genetic search, then rebuild the report from the
files on disk and export plot-ready CSVs. The same run is available as
``advfuzz run --road urban2 --budget 40 --seed 5 --tau 10 --out <dir>``.
"""

import json
import tempfile
from pathlib import Path

from advfuzz.campaign import CampaignSettings, export_series, report, run_campaign

out = Path(tempfile.mkdtemp()) / "campaign"
live = run_campaign(CampaignSettings(road="urban2", budget=40, seed=5, tau=10, offspring=10, out=str(out)))
print(json.dumps(live.to_dict(), indent=1))

# the report is a pure function of the records
assert report(out) == live

for kind in ("fitness", "histogram", "speed_traces"):
    path = export_series(out, kind)
    lines = path.read_text().splitlines()
    print(f"{path.name}: {len(lines) - 1} rows, header {lines[0]}")
