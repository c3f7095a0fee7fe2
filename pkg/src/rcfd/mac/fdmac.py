"""FD MAC receiver rule: answer an RTS with a CTS and, when possible, with data."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any


class FdPairingRule(enum.Enum):
    HEAD_ONLY = "head-only"
    FULL_QUEUE = "full-queue"


@dataclass(frozen=True)
class RtsResponse:
    cts: bool
    secondary: Any = None  # packet sent back to the RTS sender, or None


def fdmac_on_rts(queue, rts_sender: int, pairing: FdPairingRule = FdPairingRule.HEAD_ONLY) -> RtsResponse:
    """Reply to an RTS addressed to this node.

    ``queue`` is any object with ``head()`` returning the oldest packet (or
    None) and ``first_for(dest)`` returning the oldest packet for ``dest``;
    packets expose ``dst``. A CTS is always sent. Data goes back to the RTS
    sender when the head packet is for it, or under the full-queue rule when
    any queued packet is.
    """
    if pairing is FdPairingRule.HEAD_ONLY:
        h = queue.head()
        pkt = h if h is not None and h.dst == rts_sender else None
    else:
        pkt = queue.first_for(rts_sender)
    return RtsResponse(True, pkt)
