"""Discrete-event simulation of one network running one MAC protocol.

Time is integer nanoseconds. A frame sent over [start, end] reaches the
sender's neighbours over [start + T_p, end + T_p]; carrier sense and
collisions are evaluated on those shifted intervals. Contention emissions of
the frequency-domain protocols are resolved in one step at the start of a
contention epoch and only mark the neighbourhood as sensed busy.
"""
from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from ..core import (DeferState, HeardAck, HeardCts, Timeout, default_mapping, deferring_update,
                    resolve_indexed)
from ..errors import CapacityExceeded, ConfigError
from ..mac.back2f import Back2fRoundState, Heard, back2f_step
from ..mac.dcf import DROP, SCHEDULE, TRANSMIT, DcfState, Ev, Phase
from ..mac.fdmac import FdPairingRule, fdmac_on_rts
from ..timings import PhyTimings, t_data, us_to_ns
from . import engine as E
from .metrics import DISCARD_REASONS, SimMetrics, jain_index
from .topology import Topology
from .traffic import NS, TrafficSource, generate_arrivals, offered_traffic

PROTOCOLS = ("rcfd", "back2f", "fdmac", "dcf", "dcf-rtscts")
FULL_DUPLEX = {"rcfd": True, "fdmac": True, "back2f": False, "dcf": False, "dcf-rtscts": False}

DATA, ACK, RTS, CTS = "DATA", "ACK", "RTS", "CTS"


@dataclass(frozen=True)
class SimConfig:
    protocol: str = "rcfd"
    T: float = 20.0                # simulated seconds
    payload: int = 1000            # bytes
    rate: int = 6                  # Mbit/s
    t_d_mode: str = "calibrated"
    t_d: float | None = None       # override in us
    loss_p: float = 0.0
    q_max: int = 1000
    delta_max: float = 1.0         # seconds
    n_tx_max: int = 7
    pairing: str = "full-queue"
    modulation_order: int | None = None   # None: smallest power of two that fits
    transient: float | None = None        # seconds dropped from metrics; None = ts_max
    trace: bool = False

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")


@dataclass
class PacketRecord:
    pid: int
    source: int
    destination: int
    created: int
    finished: int | None = None
    delivered: bool = False
    discard_reason: str = "none"


class Packet:
    __slots__ = ("pid", "src", "dst", "created", "retries", "gone", "inflight", "delivered")

    def __init__(self, pid, src, dst, created):
        self.pid, self.src, self.dst, self.created = pid, src, dst, created
        self.retries = 0
        self.gone = False
        self.inflight = False
        self.delivered = False


class NodeQueue:
    """FIFO of packets with per-destination lookup. Removal is lazy."""

    __slots__ = ("order", "by_dst", "count")

    def __init__(self):
        self.order = deque()
        self.by_dst = {}
        self.count = 0

    def push(self, p: Packet):
        self.order.append(p)
        self.by_dst.setdefault(p.dst, deque()).append(p)
        self.count += 1

    def head(self):
        o = self.order
        while o and o[0].gone:
            o.popleft()
        return o[0] if o else None

    def first_for(self, dst):
        q = self.by_dst.get(dst)
        if not q:
            return None
        while q and q[0].gone:
            q.popleft()
        return q[0] if q else None

    def remove(self, p: Packet):
        if not p.gone:
            p.gone = True
            self.count -= 1

    def __len__(self):
        return self.count

    def live(self):
        return [p for p in self.order if not p.gone]


class Frame:
    __slots__ = ("sender", "kind", "dest", "start", "end", "pkt", "bad", "xid")

    def __init__(self, sender, kind, dest, start, end, pkt=None, xid=None):
        self.sender, self.kind, self.dest = sender, kind, dest
        self.start, self.end, self.pkt, self.xid = start, end, pkt, xid
        self.bad = set()


class Node:
    __slots__ = ("i", "queue", "arr_t", "arr_d", "arr_k", "rx", "tx", "nav", "busy",
                 "idle_since", "mac", "engaged", "waits", "wake", "reg", "defer", "b2f",
                 "pending_sec", "sent_ok", "claim", "rx_last", "rts_nav")

    def __init__(self, i):
        self.i = i
        self.queue = NodeQueue()
        self.rx = []           # frames currently arriving
        self.tx = None         # own frame on air
        self.nav = 0
        self.busy = False
        self.idle_since = 0
        self.mac = None
        self.engaged = False
        self.waits = {}        # peer -> [kind, pkt, version, role]
        self.wake = None       # time of pending arrival wake-up
        self.reg = None        # registered epoch
        self.defer = DeferState()
        self.b2f = None
        self.pending_sec = None
        self.sent_ok = 0
        self.claim = -1        # start of the latest data frame scheduled in range
        self.rx_last = -1      # latest frame head heard
        self.rts_nav = None    # (NAV value, time) set by the latest overheard RTS


class Simulation:
    def __init__(self, topology: Topology, config: SimConfig, traffic: TrafficSource,
                 timings: PhyTimings | None = None, seed: int = 0):
        self.topo = topology
        self.cfg = config
        self.traffic = traffic
        self.tm = timings or PhyTimings()
        self.seed = seed
        self.proto = config.protocol
        self.fd = FULL_DUPLEX[self.proto]
        self.dcf_like = self.proto in ("dcf", "dcf-rtscts", "fdmac")
        self.nbrs = topology.neighbors
        self.adj = dict(enumerate(topology.neighbors))
        n = topology.n
        tm = self.tm
        self.ns = {k: us_to_ns(getattr(tm, k)) for k in
                   ("t_ack", "t_rts", "t_cts", "t_sifs", "t_difs", "t_p", "t_slot", "t_round",
                    "t_scan", "t_header")}
        td_us = config.t_d if config.t_d is not None else t_data(config.payload, config.rate, config.t_d_mode)
        self.t_d = us_to_ns(td_us)
        self.T_end = int(round(config.T * NS))
        transient = traffic.ts_max if config.transient is None else config.transient
        self.t0 = int(round(transient * NS))
        if self.t0 >= self.T_end:
            raise ConfigError("transient period must be shorter than T")
        self.dmax = int(round(config.delta_max * NS))
        self.pairing = FdPairingRule(config.pairing)

        ss = np.random.SeedSequence(seed)
        s_traffic, s_mac, s_loss = ss.spawn(3)
        self.mac_rng = random.Random(int(s_mac.generate_state(1)[0]))
        self.loss_rng = random.Random(int(s_loss.generate_state(1)[0]))
        if traffic.saturated:
            self.arrivals = None
            self.sat_rng = random.Random(int(s_traffic.generate_state(1)[0]))
        else:
            self.arrivals = generate_arrivals(topology, traffic, config.T, np.random.default_rng(s_traffic))

        self.q = E.EventQueue()
        self.nodes = [Node(i) for i in range(n)]
        for nd in self.nodes:
            if self.arrivals is not None:
                t, d = self.arrivals[nd.i]
                nd.arr_t, nd.arr_d = t.tolist(), d.tolist()
            else:
                nd.arr_t, nd.arr_d = [], []
            nd.arr_k = 0
        self.pid = 0
        self.version = 0
        self.epochs = {}
        self.xid = 0

        # metrics
        self.generated = 0
        self.delivered_pkts = 0
        self.delivered_total = 0
        self.delivered_bits = 0
        self.per_node = [0] * n
        self.delay_sum = 0
        self.delay_n = 0
        self.discards = {r: 0 for r in DISCARD_REASONS}
        self.collided = 0
        self.data_frames = 0
        self.attempts = 0
        self.events = 0
        self.max_exchange = 0
        self.records = {} if config.trace else None
        self.phys_collisions = 0

        if self.proto in ("dcf", "dcf-rtscts", "fdmac"):
            rts = self.proto != "dcf"
            for nd in self.nodes:
                nd.mac = DcfState(self.ns["t_slot"], self.ns["t_difs"], tm.w_initial, tm.stage_cap,
                                  self.mac_rng, config.n_tx_max, rts)
        elif self.proto == "back2f":
            self.period = 2 * self.ns["t_round"]
            S = tm.subcarriers
            for nd in self.nodes:
                nd.b2f = Back2fRoundState(self.mac_rng.randrange(S))
        else:
            self.period = 3 * self.ns["t_round"]
            S = tm.subcarriers
            m = config.modulation_order
            if m is None:
                m = 1
                while n > m * S // 2:
                    m *= 2
            try:
                self.smap = default_mapping(n, S, m)
            except CapacityExceeded as exc:
                raise ConfigError(str(exc)) from exc
            self.nslots = S * m
            self.m = m

    # ------------------------------------------------------------------ queue
    def _new_packet(self, nd, dst, t):
        self.pid += 1
        p = Packet(self.pid, nd.i, dst, t)
        self.generated += 1
        if self.records is not None:
            self.records[p.pid] = PacketRecord(p.pid, nd.i, dst, t)
        return p

    def _discard(self, p, reason, t):
        p.gone = True
        if not p.delivered:
            self.discards[reason] += 1
            if p.created >= self.t0 and t <= self.T_end:
                self.delay_sum += t - p.created
                self.delay_n += 1
            if self.records is not None:
                r = self.records[p.pid]
                r.finished, r.discard_reason = t, reason

    def _purge(self, nd, t):
        """Drop queued packets older than delta_max at time t (in-flight ones are exempt)."""
        o = nd.queue.order
        lim = t - self.dmax
        while o:
            p = o[0]
            if p.gone:
                o.popleft()
                continue
            if p.created >= lim or p.inflight:
                break
            o.popleft()
            nd.queue.count -= 1
            self._discard(p, "age-limit", p.created + self.dmax)

    def sync(self, nd, t):
        """Admit packets created up to t, applying overflow and age limits in time order."""
        if self.arrivals is None:
            if nd.queue.count == 0 and self.nbrs[nd.i]:
                nb = self.nbrs[nd.i]
                nd.queue.push(self._new_packet(nd, nb[self.sat_rng.randrange(len(nb))], t))
            return
        at, ad = nd.arr_t, nd.arr_d
        k = nd.arr_k
        qmax = self.cfg.q_max
        qu = nd.queue
        while k < len(at) and at[k] <= t:
            a = at[k]
            self._purge(nd, a)
            p = self._new_packet(nd, ad[k], a)
            if qu.count >= qmax:
                p.gone = True
                self._discard(p, "queue-overflow", a)
            else:
                qu.push(p)
            k += 1
        nd.arr_k = k
        self._purge(nd, t)

    def _next_arrival(self, nd):
        k = nd.arr_k
        return nd.arr_t[k] if k < len(nd.arr_t) else None

    def _ensure_wake(self, nd, now):
        """Make sure an empty-queued node is woken by its next arrival."""
        if self.arrivals is None:
            return
        nxt = self._next_arrival(nd)
        if nxt is not None and nxt <= self.T_end and nd.wake != nxt:
            nd.wake = nxt
            self.q.push(nxt, nd.i, E.ARRIVAL)

    def _head(self, nd, now):
        self.sync(nd, now)
        h = nd.queue.head()
        if h is None:
            self._ensure_wake(nd, now)
        return h

    # ----------------------------------------------------------------- medium
    def _set_busy(self, nd, now):
        busy = bool(nd.rx) or nd.tx is not None or now < nd.nav
        if busy == nd.busy:
            return
        nd.busy = busy
        if not busy:
            nd.idle_since = now
        self._on_cs(nd, busy, now)

    def _send(self, nd, kind, dest, start, dur, pkt=None, xid=None):
        f = Frame(nd.i, kind, dest, start, start + dur, pkt, xid)
        if nd.tx is not None:
            raise RuntimeError(f"node {nd.i} already transmitting")
        nd.tx = f
        if not self.fd:
            for g in nd.rx:
                g.bad.add(nd.i)
        self._set_busy(nd, start)
        tp = self.ns["t_p"]
        self.q.push(f.end, nd.i, E.TX_END, f)
        self.q.push(start + tp, nd.i, E.RX_START, f)
        self.q.push(f.end + tp, nd.i, E.RX_END, f)
        if kind == DATA:
            self.data_frames += 1
        return f

    def _rx_start(self, f, now):
        nodes = self.nodes
        fd = self.fd
        for r in self.nbrs[f.sender]:
            rn = nodes[r]
            if rn.rx:
                f.bad.add(r)
                for g in rn.rx:
                    g.bad.add(r)
            if rn.tx is not None and not fd:
                f.bad.add(r)
            rn.rx.append(f)
            rn.rx_last = now
            if not rn.busy:
                self._set_busy(rn, now)
            ps = rn.pending_sec
            if ps is not None and f.kind == DATA and f.dest == r and ps[1] == f.sender:
                rn.pending_sec = None
                del rn.waits[("sec",)]
                self._start_data(rn, ps[0], ps[1], now, "secondary", immediate=True)

    def _rx_end(self, f, now):
        nodes = self.nodes
        for r in self.nbrs[f.sender]:
            rn = nodes[r]
            rn.rx.remove(f)
            ok = r not in f.bad
            if f.kind == DATA and r == f.dest:
                if not ok:
                    self.collided += 1
                elif self.cfg.loss_p > 0 and self.loss_rng.random() < self.cfg.loss_p:
                    ok = False
            if not ok and f.kind == DATA:
                # undecodable long frame: an ACK may follow (EIFS-style wait)
                self._set_nav(rn, now + self.ns["t_sifs"] + self.ns["t_ack"] + self.ns["t_p"], now)
            self._receive(rn, f, ok, now)
            if rn.busy and not rn.rx:
                self._set_busy(rn, now)

    def _set_nav(self, nd, until, now):
        if until > nd.nav:
            nd.nav = until
            self.q.push(until, nd.i, E.NAV_END)
            if not nd.busy:
                self._set_busy(nd, now)

    # -------------------------------------------------------------- delivery
    def _deliver(self, p, now):
        if p.delivered:
            return
        p.delivered = True
        if self.records is not None:
            r = self.records[p.pid]
            r.finished, r.delivered = now, True
        self.delivered_total += 1
        if now >= self.t0:
            self.delivered_pkts += 1
            self.delivered_bits += 8 * self.cfg.payload
            self.per_node[p.src] += 1
        if p.created >= self.t0:
            self.delay_sum += now - p.created
            self.delay_n += 1

    def _finish_ok(self, nd, p, now):
        nd.queue.remove(p)
        p.inflight = False
        nd.sent_ok += 1

    def _finish_fail(self, nd, p, now):
        """Count a failed attempt; returns True if the packet was dropped."""
        p.inflight = False
        p.retries += 1
        if p.retries >= self.cfg.n_tx_max:
            nd.queue.remove(p)
            self._discard(p, "retry-limit", now)
            return True
        if now - p.created > self.dmax:
            nd.queue.remove(p)
            self._discard(p, "age-limit", now)
            return True
        return False

    # ------------------------------------------------------------- main loop
    def run(self) -> SimMetrics:
        q = self.q
        now0 = 0
        for nd in self.nodes:
            self._kick(nd, now0)
        handlers = {E.TX_END: self._ev_tx_end, E.RX_END: self._ev_rx_end, E.TIMER: self._ev_timer,
                    E.RX_START: self._ev_rx_start, E.EPOCH: self._ev_epoch,
                    E.TX_START: self._ev_tx_start, E.TIMEOUT: self._ev_timeout,
                    E.ARRIVAL: self._ev_arrival, E.NAV_END: self._ev_nav_end,
                    E.DEFER_END: self._ev_defer_end, E.NAV_RESET: self._ev_nav_reset}
        heap = q.heap
        pop = heapq.heappop
        T = self.T_end
        n_ev = 0
        while heap:
            t, node, kind, _, data = pop(heap)
            if t > T:
                break
            n_ev += 1
            handlers[kind](node, data, t)
        self.events = n_ev
        return self._metrics()

    def _ev_tx_end(self, i, f, now):
        nd = self.nodes[i]
        nd.tx = None
        self._set_busy(nd, now)
        self._after_tx(nd, f, now)

    def _ev_rx_start(self, i, f, now):
        self._rx_start(f, now)

    def _ev_rx_end(self, i, f, now):
        self._rx_end(f, now)

    def _ev_tx_start(self, i, data, now):
        nd = self.nodes[i]
        kind, dest, dur, pkt, xid = data
        if nd.tx is not None:
            # cannot respond while already sending
            if kind == DATA:
                pkt.inflight = False
                w = nd.waits.get(dest)
                if w is not None and w[1] is pkt:
                    del nd.waits[dest]
                if not self.dcf_like and not nd.waits:
                    nd.engaged = False
                    self._schedule_ready(nd, now)
            return
        self._send(nd, kind, dest, now, dur, pkt, xid)

    def _ev_arrival(self, i, _, now):
        nd = self.nodes[i]
        if nd.wake == now:
            nd.wake = None
        self._kick(nd, now)

    def _ev_nav_reset(self, i, rec, now):
        nd = self.nodes[i]
        if nd.rts_nav is not rec or nd.nav != rec[0] or nd.rx_last > rec[1]:
            return
        nd.rts_nav = None
        nd.nav = now
        self._set_busy(nd, now)
        if not nd.busy:
            self._kick(nd, now)

    def _ev_nav_end(self, i, _, now):
        nd = self.nodes[i]
        if now >= nd.nav:
            self._set_busy(nd, now)
            if not nd.busy:
                self._kick(nd, now)

    # ----------------------------------------------------- protocol dispatch
    def _kick(self, nd, now):
        """A node may have new work: packet arrival, end of exchange, end of NAV."""
        if self.dcf_like:
            if nd.mac.phase is Phase.IDLE:
                if self._head(nd, now) is not None:
                    self._dcf_actions(nd, nd.mac.step(Ev.PACKET, now), now)
        else:
            self._schedule_ready(nd, now)

    def _on_cs(self, nd, busy, now):
        if self.dcf_like:
            acts = nd.mac.step(Ev.BUSY if busy else Ev.IDLE, now)
            if acts:
                self._dcf_actions(nd, acts, now)
        elif not busy:
            self._schedule_ready(nd, now)

    def _after_tx(self, nd, f, now):
        """Own transmission ended: arm timeouts for frames that expect a reply."""
        ns = self.ns
        tp, sifs = ns["t_p"], ns["t_sifs"]
        slot = ns["t_slot"]
        if f.kind == RTS:
            self._arm(nd, f.dest, "cts", f.pkt, now + tp + sifs + ns["t_cts"] + tp + slot, "primary")
        elif f.kind == DATA and f.pkt is not None and f.pkt.src == nd.i:
            role = nd.waits.get(f.dest, [None, None, None, "primary"])[3]
            self._arm(nd, f.dest, "ack", f.pkt, now + tp + sifs + ns["t_ack"] + tp + slot, role)

    def _arm(self, nd, peer, kind, pkt, deadline, role):
        self.version += 1
        nd.waits[peer] = [kind, pkt, self.version, role]
        self.q.push(deadline, nd.i, E.TIMEOUT, (peer, self.version))

    def _ev_timeout(self, i, data, now):
        nd = self.nodes[i]
        peer, ver = data
        if peer == "sec":
            w = nd.waits.get(("sec",))
            if w is None or w[2] != ver:
                return
            # the PT held: release the packet without counting an attempt
            del nd.waits[("sec",)]
            p, _ = nd.pending_sec
            nd.pending_sec = None
            p.inflight = False
            if not nd.waits:
                nd.engaged = False
                self._schedule_ready(nd, now)
            return
        w = nd.waits.get(peer)
        if w is None or w[2] != ver:
            return
        del nd.waits[peer]
        self._exchange_done(nd, w[1], False, w[3], now)

    def _exchange_done(self, nd, pkt, ok, role, now):
        if ok:
            self._finish_ok(nd, pkt, now)
        if self.dcf_like:
            if role == "primary":
                mac = nd.mac
                if ok:
                    mac.step(Ev.SUCCESS, now)
                else:
                    mac.backoff.retries = pkt.retries
                    acts = mac.step(Ev.FAILURE, now)
                    dropped = self._finish_fail(nd, pkt, now)
                    if any(a[0] == DROP for a in acts) and not dropped:
                        raise RuntimeError("retry counters out of step")
                    if dropped and mac.backoff.stage:
                        # the next packet starts from the initial window
                        mac.backoff.stage = 0
                        mac.backoff.retries = 0
                        mac._redraw()
                nd.engaged = False
                h = self._head(nd, now)
                self._dcf_actions(nd, mac.resume(now, h is not None), now)
            elif not ok:
                self._finish_fail(nd, pkt, now)
        else:
            if not ok:
                self._finish_fail(nd, pkt, now)
            if not nd.waits:
                nd.engaged = False
                self._schedule_ready(nd, now)

    # ------------------------------------------------------------------ DCF
    def _dcf_actions(self, nd, acts, now):
        for a in acts:
            if a[0] == SCHEDULE:
                self.q.push(a[1], nd.i, E.TIMER, a[2])
            elif a[0] == TRANSMIT:
                self._dcf_transmit(nd, now)

    def _ev_timer(self, i, ver, now):
        nd = self.nodes[i]
        acts = nd.mac.step(Ev.TIMER, now, ver)
        if acts:
            self._dcf_actions(nd, acts, now)

    def _dcf_transmit(self, nd, now):
        if nd.tx is not None:
            # counter ran out as our own response frame started: retry after it
            nd.mac.phase = Phase.WAIT
            return
        p = self._head(nd, now)
        if p is None:
            nd.mac.resume(now, False)
            return
        if now - p.created > self.dmax:
            # aged out while contending; stamp at its deadline
            nd.queue.remove(p)
            self._discard(p, "age-limit", p.created + self.dmax)
            h = self._head(nd, now)
            nd.mac.phase = Phase.IDLE
            self._dcf_actions(nd, nd.mac.resume(now, h is not None), now)
            return
        nd.engaged = True
        p.inflight = True
        self.attempts += 1
        ns = self.ns
        if nd.mac.rts_cts:
            self._send(nd, RTS, p.dst, now, ns["t_rts"], p)
        else:
            nd.waits[p.dst] = [None, p, None, "primary"]
            self._send(nd, DATA, p.dst, now, self.t_d, p)

    def _receive(self, nd, f, ok, now):
        if self.dcf_like:
            self._dcf_receive(nd, f, ok, now)
        else:
            self._fq_receive(nd, f, ok, now)

    def _dcf_receive(self, nd, f, ok, now):
        ns = self.ns
        tp, sifs = ns["t_p"], ns["t_sifs"]
        me = nd.i
        if not ok:
            return
        if f.dest != me:
            # virtual carrier sense from overheard frames
            if f.kind == RTS:
                until = now + 3 * sifs + ns["t_cts"] + self.t_d + ns["t_ack"] + 3 * tp
                self._set_nav(nd, until, now)
                if nd.nav == until:
                    # NAV reset: drop the reservation if no frame follows the RTS
                    nd.rts_nav = (until, now)
                    self.q.push(now + 2 * sifs + ns["t_cts"] + 2 * ns["t_slot"] + tp, me, E.NAV_RESET,
                                nd.rts_nav)
            elif f.kind == CTS:
                self._set_nav(nd, now + 2 * sifs + self.t_d + ns["t_ack"] + 2 * tp, now)
            elif f.kind == DATA:
                self._set_nav(nd, now + sifs + ns["t_ack"] + tp, now)
            return
        if f.kind == DATA:
            self._deliver(f.pkt, now)
            self.q.push(now + sifs, me, E.TX_START, (ACK, f.sender, ns["t_ack"], None, None))
        elif f.kind == RTS:
            if now < nd.nav or nd.tx is not None:
                return
            sec = None
            if self.proto == "fdmac":
                self.sync(nd, now)
                resp = fdmac_on_rts(nd.queue, f.sender, self.pairing)
                sec = resp.secondary
                if sec is not None and (sec.inflight or sec.gone):
                    sec = None
            self.q.push(now + sifs, me, E.TX_START, (CTS, f.sender, ns["t_cts"], None, None))
            if sec is not None:
                sec.inflight = True
                start = now + sifs + ns["t_cts"] + tp + sifs
                nd.waits[f.sender] = [None, sec, None, "secondary"]
                self.q.push(start, me, E.TX_START, (DATA, f.sender, self.t_d, sec, None))
        elif f.kind == CTS:
            w = nd.waits.get(f.sender)
            if w is None or w[0] != "cts":
                return
            p = w[1]
            self.version += 1
            w[0], w[2] = None, None   # cancel CTS timeout
            self.q.push(now + sifs, me, E.TX_START, (DATA, f.sender, self.t_d, p, None))
        elif f.kind == ACK:
            w = nd.waits.get(f.sender)
            if w is None or w[0] != "ack":
                return
            del nd.waits[f.sender]
            self._exchange_done(nd, w[1], True, w[3], now)

    # ------------------------------------------------ frequency-domain common
    def _schedule_ready(self, nd, now):
        if nd.engaged or nd.busy:
            return
        if nd.defer.deferred:
            return
        if self._head(nd, now) is None:
            return
        t = max(nd.idle_since + self.ns["t_scan"], now, nd.nav)
        P = self.period
        ep = -(-t // P) * P
        if nd.reg is not None and nd.reg <= ep and nd.reg >= now:
            return
        nd.reg = ep
        s = self.epochs.get(ep)
        if s is None:
            self.epochs[ep] = s = set()
            self.q.push(ep, E.GLOBAL, E.EPOCH, ep)
        s.add(nd.i)

    def _ready(self, nd, now):
        return (not nd.engaged and not nd.busy and not nd.defer.deferred and now >= nd.nav
                and nd.idle_since + self.ns["t_scan"] <= now)

    def _ev_epoch(self, _, ep, now):
        reg = self.epochs.pop(ep, ())
        contenders = []
        for i in sorted(reg):
            nd = self.nodes[i]
            if nd.reg == ep:
                nd.reg = None
            if self._ready(nd, now) and self._head(nd, now) is not None:
                contenders.append(i)
            else:
                self._schedule_ready(nd, now)
        if not contenders:
            return
        if self.proto == "back2f":
            self._back2f_epoch(contenders, now)
        else:
            self._rcfd_epoch(contenders, now)

    def _bump(self, emitters, until):
        """Nodes in range of a contention emission sense the band busy until ``until``."""
        nodes = self.nodes
        for e in emitters:
            nd = nodes[e]
            if nd.idle_since < until:
                nd.idle_since = until
            for r in self.nbrs[e]:
                rn = nodes[r]
                if rn.idle_since < until:
                    rn.idle_since = until

    def _fq_receive(self, nd, f, ok, now):
        ns = self.ns
        me = nd.i
        if not ok:
            return
        if f.kind == ACK and nd.defer.deferred and any(s == f.sender for s, _ in nd.defer.pending):
            nd.defer = deferring_update(nd.defer, HeardAck(f.sender))
            if not nd.defer.deferred:
                self._schedule_ready(nd, now)
        if f.dest != me:
            if f.kind == DATA:
                self._set_nav(nd, now + ns["t_sifs"] + ns["t_ack"] + ns["t_p"], now)
            return
        if f.kind == DATA:
            self._deliver(f.pkt, now)
            self.q.push(now + ns["t_sifs"], me, E.TX_START, (ACK, f.sender, ns["t_ack"], None, None))
        elif f.kind == ACK:
            w = nd.waits.get(f.sender)
            if w is None or w[0] != "ack":
                return
            del nd.waits[f.sender]
            self._exchange_done(nd, w[1], True, w[3], now)

    def _ev_defer_end(self, i, _, now):
        nd = self.nodes[i]
        if nd.defer.deferred:
            nd.defer = deferring_update(nd.defer, Timeout(now))
            if not nd.defer.deferred:
                self._schedule_ready(nd, now)

    def _start_data(self, nd, p, dest, start, role, immediate=False):
        nd.engaged = True
        p.inflight = True
        nd.waits[dest] = [None, p, None, role]
        self.attempts += 1
        if immediate:
            self._send(nd, DATA, dest, start, self.t_d, p)
        else:
            self.q.push(start, nd.i, E.TX_START, (DATA, dest, self.t_d, p, None))

    # --------------------------------------------------------------- BACK2F
    def _back2f_epoch(self, contenders, now):
        S = self.tm.subcarriers
        rng = self.mac_rng
        nodes = self.nodes
        cset = set(contenders)
        for i in contenders:
            back2f_step(nodes[i].b2f, None, S, rng)
        v1 = {i: nodes[i].b2f.myback for i in contenders}
        heard1 = {i: min([v1[i]] + [v1[j] for j in self.nbrs[i] if j in cset]) for i in contenders}
        r2 = [i for i in contenders if back2f_step(nodes[i].b2f, Heard(heard1[i]), S, rng) == "round2"]
        r2set = set(r2)
        v2 = {i: nodes[i].b2f.myback2 for i in r2}
        end = now + self.period
        self._bump(contenders, end)
        for i in contenders:
            nd = nodes[i]
            if i in r2set:
                h = min([v2[i]] + [v2[j] for j in self.nbrs[i] if j in r2set])
                if back2f_step(nd.b2f, Heard(h), S, rng) == "transmit":
                    p = nd.queue.head()
                    self._start_data(nd, p, p.dst, end, "primary")
                    continue
            self._schedule_ready(nd, now)

    # ----------------------------------------------------------------- RCFD
    def _free(self, nd, now):
        """Can answer an RTS: idle and not engaged, deferred or under NAV. No scan needed."""
        # a frame scheduled by the previous contention may not have reached the
        # node yet; it will be receiving during these rounds
        return (not nd.engaged and not nd.busy and not nd.defer.deferred and now >= nd.nav
                and nd.claim < now)

    def _rcfd_epoch(self, contenders, now):
        nodes = self.nodes
        rng = self.mac_rng
        picks, intents = {}, {}
        nslots = self.nslots
        for i in contenders:
            picks[i] = rng.randrange(nslots)
            intents[i] = nodes[i].queue.head().dst
        listeners = set(contenders)
        for i in contenders:
            for j in self.nbrs[i]:
                if j not in listeners and self._free(nodes[j], now):
                    self.sync(nodes[j], now)
                    listeners.add(j)
        if self.pairing is FdPairingRule.FULL_QUEUE:
            def has_for(rr, pt):
                p = nodes[rr].queue.first_for(pt)
                return p is not None and not p.inflight
        else:
            def has_for(rr, pt):
                h = nodes[rr].queue.head()
                return h is not None and h.dst == pt and not h.inflight
        _, cts_to, decisions = resolve_indexed(self.nbrs, picks, intents, listeners, has_for)
        tr = self.ns["t_round"]
        end = now + 3 * tr
        emitters = set(contenders) | set(cts_to)
        self._bump(emitters, end)
        start = end + self.ns["t_header"]
        tx = {}
        for n, (dest, primary) in decisions.items():
            if primary:
                tx[n] = (nodes[n].queue.head(), dest, True)
            else:
                tx[n] = (nodes[n].queue.first_for(dest) if self.pairing is FdPairingRule.FULL_QUEUE
                         else nodes[n].queue.head(), dest, False)
        # overheard CTS: defer until the CTS sender's ACK or a timeout
        ns = self.ns
        deadline = start + self.t_d + ns["t_p"] + ns["t_sifs"] + ns["t_ack"] + ns["t_p"] + ns["t_slot"]
        for h, pt in cts_to.items():
            peer_ok = tx.get(pt, (None, None, None))[1] == h
            for v in self.nbrs[h]:
                if v == pt and peer_ok:
                    continue
                vn = nodes[v]
                vn.defer = deferring_update(vn.defer, HeardCts(h, deadline))
                self.q.push(deadline, v, E.DEFER_END)
        tp = ns["t_p"]
        for n, (p, dest, primary) in tx.items():
            nd = nodes[n]
            nd.claim = start
            for v in self.nbrs[n]:
                nodes[v].claim = start
            if primary:
                self._start_data(nd, p, dest, start, "primary")
            else:
                # the RR answers only once the PT's frame actually reaches it
                nd.engaged = True
                p.inflight = True
                nd.pending_sec = (p, dest)
                self.version += 1
                self.q.push(start + tp + 1, n, E.TIMEOUT, ("sec", self.version))
                nd.waits[("sec",)] = [None, p, self.version, "secondary"]
        for i in contenders:
            if i not in tx:
                self._schedule_ready(nodes[i], now)

    # -------------------------------------------------------------- metrics
    def _metrics(self) -> SimMetrics:
        G = offered_traffic(self.topo, self.traffic)
        span = (self.T_end - self.t0) / NS
        gamma = self.delivered_bits / span / G if G > 0 else 0.0
        delta = self.delay_sum / self.delay_n / NS if self.delay_n else 0.0
        active = [self.per_node[i] for i in range(self.topo.n) if self.nbrs[i]]
        jain = jain_index(active) if active else 1.0
        in_queue = in_flight = 0
        for nd in self.nodes:
            self.sync(nd, self.T_end)
        for nd in self.nodes:
            for p in nd.queue.live():
                if p.delivered:
                    continue
                if p.inflight:
                    in_flight += 1
                else:
                    in_queue += 1
        return SimMetrics(gamma=gamma, delta=delta, jain=jain, offered=G,
                          delivered=self.delivered_pkts, collided=self.collided,
                          discarded=dict(self.discards), generated=self.generated,
                          in_queue=in_queue, in_flight=in_flight, attempts=self.attempts,
                          delivered_bits=self.delivered_bits, events=self.events,
                          delivered_total=self.delivered_total)


def run(topology: Topology, protocol: str = "rcfd", traffic: TrafficSource | None = None,
        timings: PhyTimings | None = None, T: float = 20.0, seed: int = 0, **kw) -> SimMetrics:
    """Simulate ``protocol`` on ``topology`` for T seconds and return the metrics.

    Extra keyword arguments go to :class:`SimConfig`.
    """
    cfg = SimConfig(protocol=protocol, T=T, **kw)
    traffic = traffic or TrafficSource(payload=cfg.payload)
    if traffic.payload != cfg.payload:
        traffic = replace(traffic, payload=cfg.payload)
    return Simulation(topology, cfg, traffic, timings, seed).run()
