"""
Driving the command line tool
=============================

The same calculations run from a configuration file.  Output is CSV on
stdout, preceded by ``#`` lines echoing the fully defaulted configuration.
"""

# %%
import csv
import io
import subprocess
import sys
import tempfile
from pathlib import Path

CONFIG = """\
[system]
builder = single_site
eps0 = 0.0

[lead_L]
N = 32
v0 = 0.2
gamma = 0.05

[lead_R]
N = 32
v0 = 0.2
gamma = 0.05

[fermi]
mu_L = 0.25
mu_R = -0.25

[run]
sweep_parameter = gamma
sweep_values = 0.01, 0.05, 0.2
sweep_methods = pole_sum, nonmarkovian, landauer_semiinfinite
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "sweep.ini"
    path.write_text(CONFIG)
    proc = subprocess.run([sys.executable, "-m", "relaxjunction", "sweep", "--config",
                           str(path), "--jobs", "2"], capture_output=True, text=True)

print("exit code:", proc.returncode)
body = "\n".join(l for l in proc.stdout.splitlines() if not l.startswith("#"))
for row in csv.DictReader(io.StringIO(body)):
    print(f"gamma={row['param_value']:>5s} {row['method']:22s} {float(row['current']):.8f}")
