"""Walk through the two three-node contention scenarios round by round.

Nodes n1, n2, n3 sit on a line (n1 - n2 - n3) with six subcarriers.
Run: python3 demos/worked_scenarios.py
"""
from rcfd.acceptance import worked_scenario


def show(sl):
    return ",".join(f"s{x.subcarrier + 1}" for x in sorted(sl, key=lambda x: x.subcarrier)) or "-"


for number, story in ((1, "n1 and n3 both want to send to n2"),
                      (2, "n1 and n2 each hold a packet for the other")):
    out = worked_scenario(number)
    print(f"scenario {number}: {story}")
    for n in sorted(out.observations):
        o = out.observations[n]
        d = out.decisions[n]
        print(f"  n{n + 1}: role {out.roles[n].name.lower():20s}"
              f" round1 {show(o.round1_heard):8s}"
              f" round2 {show(o.round2_heard_set1 | o.round2_heard_set2):8s}"
              f" round3 {show(o.round3_heard_set1 | o.round3_heard_set2):8s}"
              f" -> {d.kind.name.lower()}" + (f" to n{d.dest + 1}" if d.dest is not None else ""))
    print()
