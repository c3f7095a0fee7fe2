"""802.11 DCF contention state machine (basic access and RTS/CTS).

The machine only decides *when* a node may start a transmission attempt.
Frame exchange, timeouts and NAV bookkeeping live in the simulator, which
feeds the machine channel events and exchange outcomes and carries out the
returned actions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..timings import PhyTimings

N_TX_MAX = 7  # attempts per packet before it is dropped


@dataclass
class BackoffState:
    stage: int = 0
    counter: int = 0
    cw: int = 16
    retries: int = 0

    @staticmethod
    def window(W: int, stage: int, stage_cap: int) -> int:
        return W * 2 ** min(stage, stage_cap)


class Phase(enum.Enum):
    IDLE = "idle"          # nothing queued
    WAIT = "wait"          # packet queued, medium busy
    ACCESS = "access"      # medium idle: DIFS, then the backoff countdown
    EXCHANGE = "exchange"  # attempt in progress


# channel / outcome events
class Ev(enum.Enum):
    PACKET = "packet"      # a packet became available
    BUSY = "busy"
    IDLE = "idle"
    TIMER = "timer"
    SUCCESS = "success"
    FAILURE = "failure"


# actions returned to the caller
SCHEDULE = "schedule"   # ("schedule", time, version)
TRANSMIT = "transmit"   # ("transmit",)
DROP = "drop"           # ("drop",) head packet hit the retry limit


class DcfState:
    """Contention state of one node.

    ``rng`` needs ``randrange``. Times are integers in the caller's unit; the
    slot and DIFS lengths are given in that unit too.
    """

    __slots__ = ("backoff", "phase", "version", "count_start", "slot", "difs",
                 "W", "stage_cap", "n_tx_max", "rng", "has_packet", "busy", "rts_cts")

    def __init__(self, slot: int, difs: int, W: int = 16, stage_cap: int = 6, rng=None,
                 n_tx_max: int = N_TX_MAX, rts_cts: bool = False):
        self.slot, self.difs, self.W, self.stage_cap = slot, difs, W, stage_cap
        self.n_tx_max = n_tx_max
        self.rng = rng
        self.rts_cts = rts_cts
        self.backoff = BackoffState(cw=W)
        self.backoff.counter = rng.randrange(W)
        self.phase = Phase.IDLE
        self.version = 0
        self.count_start = 0
        self.has_packet = False
        self.busy = False

    def _redraw(self):
        b = self.backoff
        b.cw = BackoffState.window(self.W, b.stage, self.stage_cap)
        b.counter = self.rng.randrange(b.cw)

    def _start_difs(self, now):
        # one timer covers DIFS plus the remaining backoff slots
        self.phase = Phase.ACCESS
        self.count_start = now + self.difs
        self.version += 1
        return [(SCHEDULE, self.count_start + self.backoff.counter * self.slot, self.version)]

    def step(self, ev: Ev, now: int, version: int | None = None) -> list:
        b = self.backoff
        if ev is Ev.TIMER:
            if version != self.version or self.phase is not Phase.ACCESS:
                return []
            b.counter = 0
            self.phase = Phase.EXCHANGE
            return [(TRANSMIT,)]
        if ev is Ev.BUSY:
            self.busy = True
            if self.phase is Phase.ACCESS:
                self.version += 1
                if now >= self.count_start + b.counter * self.slot:
                    # the last slot ended as the medium turned busy: the node
                    # transmits in the same slot as the other sender
                    b.counter = 0
                    self.phase = Phase.EXCHANGE
                    return [(TRANSMIT,)]
                # freeze: only whole idle slots after DIFS count
                if now > self.count_start:
                    b.counter -= (now - self.count_start) // self.slot
                self.phase = Phase.WAIT
            return []
        if ev is Ev.IDLE:
            self.busy = False
            if self.phase is Phase.WAIT and self.has_packet:
                return self._start_difs(now)
            return []
        if ev is Ev.PACKET:
            self.has_packet = True
            if self.phase is Phase.IDLE:
                if self.busy:
                    self.phase = Phase.WAIT
                    return []
                return self._start_difs(now)
            return []
        if ev is Ev.SUCCESS or ev is Ev.FAILURE:
            acts = []
            if ev is Ev.SUCCESS:
                b.stage = 0
                b.retries = 0
            else:
                b.retries += 1
                if b.retries >= self.n_tx_max:
                    acts.append((DROP,))
                    b.stage = 0
                    b.retries = 0
                else:
                    b.stage += 1
            self._redraw()
            self.phase = Phase.IDLE
            return acts
        raise ValueError(ev)

    def resume(self, now: int, has_packet: bool) -> list:
        """Re-enter contention after an exchange, given the queue state."""
        self.has_packet = has_packet
        if not has_packet:
            self.phase = Phase.IDLE
            return []
        if self.busy:
            self.phase = Phase.WAIT
            return []
        return self._start_difs(now)


def dcf_step(state: DcfState, event: Ev, now: int, timings: PhyTimings | None = None,
             rts_cts: bool | None = None, version: int | None = None) -> list:
    """Advance ``state`` by one channel or outcome event and return the actions.

    ``timings`` and ``rts_cts`` are accepted for interface symmetry; the
    state already carries its slot, DIFS and access mode.
    """
    return state.step(event, now, version)
