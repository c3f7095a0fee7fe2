"""Event queue with a total order on simultaneous events."""
from __future__ import annotations

import heapq

# Events are ordered by (time, node id, kind, insertion order). Network-wide
# events use node id GLOBAL so they run after every per-node event at the same
# instant.
TX_END = 0      # a node's own transmission ends
RX_END = 1      # frame tail reaches the sender's neighbours
TIMER = 2       # DCF DIFS / backoff expiry
RX_START = 3    # frame head reaches the sender's neighbours
EPOCH = 4       # frequency-domain contention opportunity
TX_START = 5    # scheduled response / data transmission
TIMEOUT = 6     # CTS or ACK timeout
ARRIVAL = 7     # wake an idle node for a new packet
NAV_END = 8
DEFER_END = 9
NAV_RESET = 10  # overheard RTS with no follow-up frame

GLOBAL = 1 << 30

KIND_NAMES = {TX_END: "tx_end", RX_END: "rx_end", TIMER: "timer", RX_START: "rx_start",
              EPOCH: "epoch", TX_START: "tx_start", TIMEOUT: "timeout", ARRIVAL: "arrival",
              NAV_END: "nav_end", DEFER_END: "defer_end",
              NAV_RESET: "nav_reset"}


class EventQueue:
    """Min-heap of (time, node, kind, seq, data) tuples."""

    __slots__ = ("heap", "seq")

    def __init__(self):
        self.heap = []
        self.seq = 0

    def push(self, time: int, node: int, kind: int, data=None) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (time, node, kind, self.seq, data))

    def pop(self):
        return heapq.heappop(self.heap)

    def __len__(self):
        return len(self.heap)

    def peek_time(self):
        return self.heap[0][0] if self.heap else None
