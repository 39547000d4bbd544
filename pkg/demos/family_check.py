"""Cross-check the two semantics over every small process.

Generates all processes up to the given bounds (one per renaming of the
activity names), pairs each with every commit/abort assignment, and runs
the four checks. Also shows what happens when one entry of the outcome
table is corrupted.

    python3 demos/family_check.py [max_activities] [max_depth]

The default bounds (2, 2) run in about a second; (3, 2) takes minutes and
is the family used by the acceptance suite.
"""
import sys
import time

from sagac import static
from sagac.conformance import CHECKS, GenBounds, check_family
from sagac.dynamic import DYNAMIC_RULES
from sagac.static import STATIC_RULES
from sagac.terms import Outcome

n, depth = (int(a) for a in (sys.argv[1:] or ["2", "2"]))
bounds = GenBounds(n, depth, ("a", "b"))

start = time.perf_counter()
r = check_family(bounds)
print(f"{r.subjects} subjects checked in {time.perf_counter() - start:.1f}s")
for c in CHECKS:
    print(f"  {c:9} {'PASS' if r.verdict(c) else 'FAIL'}")
for name, rules in (("big-step", STATIC_RULES), ("transition", DYNAMIC_RULES)):
    idle = [rule for rule in rules if not r.coverage[rule]]
    print(f"  {name} rules never fired: {', '.join(idle) or 'none'}")

print("\nNow pretend abort and commit in parallel are incompatible.")
table = static.COMBINE_TABLE
saved = table[Outcome.ABORT, Outcome.COMMIT]
table[Outcome.ABORT, Outcome.COMMIT] = table[Outcome.COMMIT, Outcome.ABORT] = None
try:
    bad = check_family(GenBounds(2, 1))
finally:
    table[Outcome.ABORT, Outcome.COMMIT] = table[Outcome.COMMIT, Outcome.ABORT] = saved
first = bad.failures["theorem1"][0]
print(f"  theorem1 fails on {first.process} under {first.env}")
print(f"  smallest failing subterm: {first.minimal['process']}")
