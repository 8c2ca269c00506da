"""
Figure data and the command line
=================================

Every figure is available as a CSV table.  The same tables, and z-score
comparisons between closed forms and simulation, come out of the
``simocorr`` command.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from simocorr.figures import SimOptions, make_figure

t = make_figure(2)
print(t.title)
print(t.series_labels)
for x, vals in t.rows[:3]:
    print(int(x), [round(v, 6) for v in vals])

# Monte Carlo columns are appended on request
t = make_figure(5, sim=SimOptions(realizations=20_000, seed=5), n_max=16)
print("\n", t.series_labels)
print("n=16:", dict(zip(t.series_labels, t.rows[-1][1])))

# the command line front end
with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "fig4.csv"
    cli = [sys.executable, "-m", "simocorr"]
    subprocess.run(cli + ["fig", "4", "--out", str(out)], check=True)
    print("\n" + "\n".join(out.read_text().splitlines()[:6]))
    print("manifest:", out.with_name("fig4.csv.manifest.json").exists())

    scenario = Path(tmp) / "scenario.cfg"
    scenario.write_text("Delta = 0.25\ndelta = 0.5\ntheta = 1\nn = 1, 2, 4\n"
                        "quantities = joint, selection, correlation\nrealizations = 20000\n")
    res = subprocess.run(cli + ["compare", "--config", str(scenario)], capture_output=True,
                         text=True)
    print(f"\ncompare exit status {res.returncode}\n{res.stdout}")
    res = subprocess.run(cli + ["eval", "joint_success_prob", "Δ=0.25", "δ=0.5", "n=2", "θ=1"],
                         capture_output=True, text=True)
    print("eval:", res.stdout.strip())
