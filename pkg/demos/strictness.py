"""Static labels can promise more orderings than any run produces.

For the split-load process with the second load of truck B failing, the
big-step label ``(loadA1; unloadA1) | loadB1`` allows truck A to be loaded
and unloaded before truck B starts. No small-step computation does that:
truck A is only compensated after B's failure is noticed.

    python3 demos/strictness.py
"""
from pathlib import Path

from sagac.conformance import strictness_witnesses
from sagac.syntax import parse_env, parse_process

DATA = Path(__file__).resolve().parent / "data"

p = parse_process((DATA / "split_loads.saga").read_text())
env = parse_env((DATA / "loadB2_aborts.env").read_text())

report = strictness_witnesses(env, p)
for entry in report.witnesses:
    print(f"{entry['outcome']:>12}  {entry['label']}")
    for w in entry["realizable"]:
        print(f"{'':14}realized      {w}")
    for w in entry["unrealizable"]:
        print(f"{'':14}never seen    {w}")
print(f"\n{report.stats['unrealizable_words']} linearization(s) without a matching computation")
