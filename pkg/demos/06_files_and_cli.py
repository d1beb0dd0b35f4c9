"""
Files and the command line
==========================

Systems serialize to a plain-text format that round-trips bit for bit.
The ``bigframe`` command reads the same files.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from bigframe.instances import GeneratorSpec, deserialize, random_system, serialize

spec = GeneratorSpec(ambient_dim=5, family_size=3, kind="tight", seed=4)
system = random_system(spec)
blob = serialize(system)
print(blob.decode().splitlines()[:6])
print("round trip exact:", deserialize(blob) == system)

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "tight.bgf"
    path.write_bytes(blob)
    for args in (["analyze", str(path)], ["bounds", str(path)],
                 ["verify", "4.4", "--instances", "20"]):
        proc = subprocess.run([sys.executable, "-m", "bigframe.cli", *args],
                              capture_output=True, text=True)
        print("$ bigframe", " ".join(args), f"(exit {proc.returncode})")
        print(proc.stdout, end="")
