"""Per-cell scheduling, HARQ management and latency accounting.

Each TTI of the current frame configuration serves one direction.  Pending
retransmissions that have cleared their feedback-plus-preparation delay are
always placed first; remaining resource blocks go to new transport blocks in
proportional-fair order, each sized to the head packet's remaining bits at
the link-adapted MCS.  Link adaptation works from the large-scale serving
SNR with a per-user outer-loop offset driven to a first-transmission BLER
target; it deliberately knows nothing about instantaneous fading or
cross-direction interference, which is what turns unexpected interference
into HARQ retransmissions.

A completed packet's one-way latency splits exactly into queuing (waiting
for a direction-eligible, resource-free TTI), air time, retransmission
stalls, and fixed processing (preparation plus decode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .phy import McsTable, select_mcs
from .traffic import DL, UL, Packet, TrafficState


@dataclass(slots=True)
class Transmission:
    """One transport block, possibly in flight across HARQ attempts."""

    cell: int
    ue: int
    direction: int
    packet: Packet
    tb_bits: int
    mcs: int
    n_prb: int
    power_per_prb_mw: float
    attempt: int = 1
    gamma_sum: float = 0.0
    eligible_ms: float = 0.0
    t0_sym: int = -1
    prb_lo: int = 0


@dataclass(slots=True)
class UEState:
    ue: int
    direction: int
    est_snr_db: float        # serving-link SNR per PRB at full reference power
    pf_avg_bits: float
    olla_db: float
    pending: Transmission | None = None


@dataclass(slots=True)
class LatencyRecord:
    pid: int
    direction: int
    cell: int
    arrival_ms: float
    total_ms: float
    queuing_ms: float
    tx_ms: float
    harq_ms: float
    processing_ms: float


class CellMac:
    """Scheduler and HARQ state of one cell (both directions)."""

    def __init__(self, cell: int, cfg, mcs_table: McsTable, traffic: TrafficState,
                 ue_links: dict):
        self.cell = cell
        self.cfg = cfg
        self.table = mcs_table
        self.traffic = traffic
        self.ues: dict[int, UEState] = {}
        for ue, (direction, est_snr, olla_init) in ue_links.items():
            self.ues[ue] = UEState(ue=ue, direction=direction, est_snr_db=est_snr,
                                   pf_avg_bits=1.0, olla_db=olla_init)
        # UEs with queued traffic and no block in flight, per direction
        self.ready: tuple[set, set] = (set(), set())
        # transport blocks awaiting a retransmission opportunity, per direction
        self.retx: tuple[list, list] = ([], [])
        self.records: list[LatencyRecord] = []
        self.olla_nack_step = cfg.olla_step_db * (1.0 - cfg.olla_target_bler) / cfg.olla_target_bler
        self.olla_ack_step = cfg.olla_step_db
        self._prep_ms = cfg.prep_delay_symbols * cfg.symbol_ms
        self._tti_ms = 4.0 * cfg.symbol_ms
        self._decode_ms = (cfg.pdsch_decode_symbols * cfg.symbol_ms,
                           cfg.pusch_decode_symbols * cfg.symbol_ms)
        self._bs_prb_mw = 10.0 ** ((cfg.bs_power_dbm - 10.0 * math.log10(cfg.prb_count)) / 10.0)
        self._ue_total_mw = 10.0 ** (cfg.ue_power_dbm / 10.0)

    # -- arrivals ---------------------------------------------------------

    def on_arrival(self, packet: Packet) -> None:
        self.traffic.push(self.cell, packet)
        state = self.ues[packet.ue]
        if state.pending is None:
            self.ready[packet.direction].add(packet.ue)

    # -- scheduling ---------------------------------------------------------

    def _plan_mcs(self, state: UEState, n_prb: int) -> int:
        est = state.est_snr_db - state.olla_db
        if state.direction == UL and n_prb > 1:
            est -= 10.0 * math.log10(n_prb)  # full UE power split over the allocation
        return select_mcs(self.table, est)

    def _round_alloc(self, needed: int, free: int) -> int:
        g = self.cfg.prb_alloc_granularity
        return min(free, g * (-(-needed // g)))

    def _plan_new_tb(self, state: UEState, remaining: int, free: int) -> tuple[int, int, int]:
        """(mcs, n_prb, tb_bits) for a fresh transport block."""
        if state.direction == DL:
            mcs = self._plan_mcs(state, 1)
            bpp = int(self.table.bits_per_prb[mcs])
            n = self._round_alloc(-(-remaining // bpp), free)
            return mcs, n, min(remaining, bpp * n)
        n = 1
        for _ in range(4):
            mcs = self._plan_mcs(state, n)
            bpp = int(self.table.bits_per_prb[mcs])
            n_new = self._round_alloc(-(-remaining // bpp), free)
            if n_new == n:
                break
            n = n_new
        return mcs, n, min(remaining, bpp * n)

    def schedule_tti(self, t0_sym: int, t0_ms: float, direction: int) -> list[Transmission]:
        """Allocate the TTI's PRBs: eligible retransmissions first, then PF."""
        retx = self.retx[direction]
        ready = self.ready[direction]
        if not retx and not ready:
            return []
        free = self.cfg.prb_count
        allocs: list[Transmission] = []

        if retx:
            due = sorted((tx for tx in retx if tx.eligible_ms <= t0_ms),
                         key=lambda tx: (tx.eligible_ms, tx.ue))
            for tx in due:
                if tx.n_prb <= free:
                    tx.t0_sym = t0_sym
                    tx.prb_lo = self.cfg.prb_count - free
                    free -= tx.n_prb
                    retx.remove(tx)
                    allocs.append(tx)

        if ready and free > 0:
            queues = self.traffic.cells[self.cell].queues
            cands = []
            for ue in ready:
                head = queues[ue][0]
                if head.earliest_tx_ms <= t0_ms:
                    state = self.ues[ue]
                    mcs_est = self._plan_mcs(state, 1)
                    metric = float(self.table.bits_per_prb[mcs_est]) / state.pf_avg_bits
                    cands.append((-metric, state.pf_avg_bits, ue, head))
            cands.sort()
            w = self.cfg.pf_window_ttis
            for _, _, ue, head in cands:
                state = self.ues[ue]
                served = 0
                if free > 0:
                    mcs, n, tb_bits = self._plan_new_tb(state, head.remaining_bits, free)
                    power = self._bs_prb_mw if direction == DL else self._ue_total_mw / n
                    tx = Transmission(cell=self.cell, ue=ue, direction=direction,
                                      packet=head, tb_bits=tb_bits, mcs=mcs, n_prb=n,
                                      power_per_prb_mw=power, t0_sym=t0_sym,
                                      prb_lo=self.cfg.prb_count - free)
                    free -= n
                    state.pending = tx
                    ready.discard(ue)
                    if head.first_tx_ms < 0:
                        head.first_tx_ms = t0_ms
                    served = tb_bits
                    allocs.append(tx)
                state.pf_avg_bits += (served - state.pf_avg_bits) / w
        for tx in allocs:
            tx.packet.tx_count += 1
        return allocs

    # -- HARQ outcomes -------------------------------------------------------

    def on_decode(self, tx: Transmission, success: bool) -> LatencyRecord | None:
        """Apply a decode outcome; returns a latency record on packet completion."""
        state = self.ues[tx.ue]
        packet = tx.packet
        decode_end_ms = (tx.t0_sym + 4) * self.cfg.symbol_ms + self._decode_ms[tx.direction]
        if tx.attempt == 1:  # outer loop tracks first-transmission BLER only
            if success:
                state.olla_db = max(-10.0, state.olla_db - self.olla_ack_step)
            else:
                state.olla_db = min(30.0, state.olla_db + self.olla_nack_step)
        packet.harq_attempts = tx.attempt

        if success:
            self.traffic.serve_bits(self.cell, packet, tx.tb_bits)
            state.pending = None
            if packet.remaining_bits == 0:
                packet.completion_ms = decode_end_ms
                self.traffic.complete(self.cell, packet)
                record = self.account_latency(packet)
                self.records.append(record)
            else:
                packet.harq_attempts = 0  # next block starts a fresh HARQ process
            queue = self.traffic.cells[self.cell].queues.get(tx.ue)
            if queue:
                self.ready[tx.direction].add(tx.ue)
            return record if packet.remaining_bits == 0 else None

        if tx.attempt >= self.cfg.harq_max_attempts:
            state.pending = None
            self.traffic.drop(self.cell, packet)
            queue = self.traffic.cells[self.cell].queues.get(tx.ue)
            if queue:
                self.ready[tx.direction].add(tx.ue)
            return None

        tx.attempt += 1
        tx.eligible_ms = decode_end_ms + self._prep_ms
        self.retx[tx.direction].append(tx)
        return None

    # -- latency accounting ----------------------------------------------------

    def account_latency(self, packet: Packet) -> LatencyRecord:
        """Split a completed packet's one-way latency into its components."""
        if packet.completion_ms < 0:
            raise ValueError("packet has not completed")
        prep = self._prep_ms
        processing = prep + self._decode_ms[packet.direction]
        total = packet.completion_ms - packet.arrival_ms
        queuing = max(0.0, packet.first_tx_ms - packet.arrival_ms - prep)
        tx_ms = packet.tx_count * self._tti_ms
        harq = total - queuing - tx_ms - processing
        if harq < -1e-9:
            raise RuntimeError(f"negative HARQ component {harq} for packet {packet.pid}")
        return LatencyRecord(pid=packet.pid, direction=packet.direction, cell=self.cell,
                             arrival_ms=packet.arrival_ms, total_ms=total,
                             queuing_ms=queuing, tx_ms=tx_ms, harq_ms=max(0.0, harq),
                             processing_ms=processing)
