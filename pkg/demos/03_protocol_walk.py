"""Walk every state of the 27-state set through its discrimination tree."""
from nlwe.protocols import PROTOCOLS, simulate
from nlwe.statesets import build_named

for name in ("g3", "g2"):
    rep = simulate(build_named(name), PROTOCOLS[name]())
    print(f"{name}: distinguished={rep.distinguished} "
          f"perfectly_discriminated={rep.perfectly_discriminated}")
    for sid, r in sorted(rep.states.items())[:6]:
        print(f"   {sid:6} paths {r.paths}  {r.verdict}")

# In the second set two states can trigger two different outcomes of the first
# measurement. Every outcome still identifies the state, so discrimination is
# perfect, but branching is not single-outcome.
