"""Loading a ship from two trucks, then leaving port.

Walks through the big-step judgments and the small-step computations of
the same process under a few failure scenarios.

    python3 demos/ship_loading.py
"""
from pathlib import Path

from sagac.dynamic import all_computations
from sagac.static import top_big_steps
from sagac.syntax import parse_env, parse_process, pretty, pretty_term

DATA = Path(__file__).resolve().parent / "data"


def load(process_file, env_file):
    p = parse_process((DATA / process_file).read_text(), source=process_file)
    return p, parse_env((DATA / env_file).read_text(), source=env_file)


def show_judgments(p, env):
    print(f"\n  {pretty(p)}")
    for j in sorted(top_big_steps(env, p), key=lambda j: (j.outcome.value, pretty_term(j.label))):
        print(f"    {j.outcome.value:>12}  label {pretty_term(j.label):35} comp {pretty_term(j.final_comp)}")


def show_computations(p, env):
    comps = all_computations(env, p)
    print(f"\n  {len(comps)} computation(s) of {pretty(p)}")
    for c in sorted(comps, key=lambda c: (c.gamma, c.outcome.value)):
        word = "; ".join(c.gamma) or "0"
        print(f"    {word:40} -> {c.outcome.value}, residual {pretty_term(c.residual)}")


print("Leaving port fails after both trucks are loaded.")
ship, env = load("ship.saga", "leave_aborts.env")
show_judgments(ship, env)
print("  The loads ran in parallel, so the compensation unloads them in parallel too.")

print("\nWrapped in a saga, the abort is absorbed and the compensation runs.")
wrapped, _ = load("ship_in_saga.saga", "leave_aborts.env")
show_judgments(wrapped, env)
show_computations(wrapped, env)

print("\nTruck B fails to load and unloading truck A also fails.")
ship, env = load("ship.saga", "loadB_unloadA_abort.env")
show_judgments(ship, env)
show_computations(ship, env)

print("\nTruck A is loaded in two stages; truck B fails.")
split, env = load("ship_split_a.saga", "loadB_aborts.env")
show_computations(split, env)
print("  Traces that pass through a dagger step show the sibling branch being killed")
print("  while it was part-way through its own work.")
