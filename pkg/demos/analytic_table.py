"""Saturation throughput of the five MACs for a few network sizes.

Run: python3 demos/analytic_table.py
"""
from rcfd.analytic import eta_protocol

PROTOS = ("dcf", "dcf-rtscts", "fdmac", "back2f", "rcfd")

print("N    " + "".join(f"{p:>12s}" for p in PROTOS))
for n in (2, 5, 10, 20, 50):
    print(f"{n:<5d}" + "".join(f"{eta_protocol(p, n).eta:12.4f}" for p in PROTOS))

# where does RCFD's margin come from? every slot carries an exchange, and one
# in N-1 of them is full duplex
r = eta_protocol("rcfd", 10)
print(f"\nrcfd N=10: slot {r['T_S']:.0f} us, data {r['T_d']:.0f} us, FD share {r['P_s_fd']:.3f}")
