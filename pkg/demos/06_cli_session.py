"""Driving the ``tmfrac`` command line from Python.

The same runs from a shell::

    tmfrac verify --out out/verify
    tmfrac maximize --eps 2 --n 512 --out out/max
    tmfrac testfn --nu-frac 0.25 --out out/tf

Run with ``python3 demos/06_cli_session.py``.
"""

# %%
import json
import tempfile
from pathlib import Path

from tmfrac.cli import main

work = Path(tempfile.mkdtemp(prefix="tmfrac-demo-"))

# %%
cfg = work / "run.json"
cfg.write_text(json.dumps({"params": {"p": 2.0, "theta": 1.0}, "eps": 2.0, "grid": {"n": 512}}))
code = main(["maximize", "--config", str(cfg), "--out", str(work / "max")])
print("exit", code)
print((work / "max" / "result.json").read_text())

# %%
code = main(["verify", "--out", str(work / "verify")])
print("exit", code)
print((work / "verify" / "report.txt").read_text())

# %% [markdown]
# An unknown configuration key is rejected with exit status 2.

# %%
cfg.write_text(json.dumps({"params": {"colour": "red"}}))
print("exit", main(["eigen", "--config", str(cfg), "--out", str(work / "bad")]))
