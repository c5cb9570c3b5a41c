"""Slot-clock simulation loop and run-level result documents.

One run advances a global symbol clock slot by slot.  At every frame-
configuration update boundary, cells turn their per-slot buffered-traffic
samples into frame averages, exchange them (with an optional backhaul
delay), and the active policy maps the report set to the next period's
frame configuration(s).  Within a slot, each cell schedules the TTI blocks
its configuration grants it; all transmissions of the slot are then resolved
jointly: fading is drawn per link and TTI, the combiner output SINR of every
transport block accounts for exactly the co-scheduled transmissions that
overlap it in time and frequency, and decode outcomes feed HARQ, drop and
latency accounting.

The run is a pure function of (scenario, seed): arrivals, fading, decode
margins and all iteration orders are deterministic.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import coordination as coord
from . import phy, stats
from .frame import RadioFrameConfig, RfcSet, make_rfc_set
from .mac import CellMac, LatencyRecord
from .scenario import (STREAM_SLOT, STREAM_TOPOLOGY, STREAM_TRAFFIC, RngFactory,
                       Scenario, Topology, build_topology, scenario_to_text)
from .traffic import DIR_NAMES, DL, UL, Packet, TrafficState, generate_arrivals

SYMBOLS_PER_SLOT = 14


class SimulationError(RuntimeError):
    """A module error with frame/slot/cell context attached."""


@dataclass
class RunCounters:
    tti_count: int = 0
    tx_events: int = 0
    flexible_calls: int = 0
    flexible_with_cli: int = 0
    decode_failures: int = 0


@dataclass
class CoordinationRow:
    period: int
    mu_bars: list | None
    theta: float | None
    labels: tuple


@dataclass
class RunResult:
    scenario: Scenario
    records: dict                      # column name -> np.ndarray
    counters: RunCounters
    coordination_rows: list
    rfc_histogram: dict
    generated: list
    completed: list
    dropped: list
    residual: int
    generated_bits: list
    completed_bits: list
    dropped_bits: list
    offered_bits_per_s: np.ndarray     # (cells, 2)
    carried_bits_per_s: np.ndarray     # (cells, 2)
    runtime_s: float = 0.0

    def samples(self, direction: int | None = None, include_warmup: bool = False) -> np.ndarray:
        total = self.records["total_ms"]
        mask = np.ones(total.size, dtype=bool)
        if not include_warmup:
            mask &= self.records["arrival_ms"] >= self.scenario.warmup_ms
        if direction is not None:
            mask &= self.records["direction"] == direction
        return total[mask]

    @property
    def drop_rate(self) -> float:
        gen = sum(self.generated)
        return 0.0 if gen == 0 else sum(self.dropped) / gen


def _build_policy(s: Scenario) -> coord.TddPolicy:
    if s.tdd_policy == "proposed":
        return coord.Proposed(beta_hat=s.beta_hat, beta_max=s.beta_max,
                              use_empirical_mean=s.balance_use_empirical_mean,
                              mirrored=s.kaiser_mirrored)
    if s.tdd_policy == "static":
        return coord.StaticTdd(alpha=s.static_alpha, bias=s.static_bias,
                               offered_dl_share=s.offered_dl_share)
    return coord.DynamicTdd(cli_free=s.dynamic_cli_free)


class _Simulation:
    def __init__(self, s: Scenario):
        s.validate()
        self.s = s
        self.rngf = RngFactory(s.seed)
        self.topo: Topology = build_topology(s, self.rngf.stream(STREAM_TOPOLOGY))
        ratios = tuple(r.strip() for r in s.rfc_ratios.split(",") if r.strip())
        self.rfc_set: RfcSet = make_rfc_set(ratios, s.slots_per_frame)
        self.policy = _build_policy(s)
        self.aligned_mode = s.tdd_policy in ("proposed", "static")
        self.cli_free = s.tdd_policy != "dynamic" or s.dynamic_cli_free
        self.table = phy.make_mcs_table(s.mcs_shannon_gap_db, s.data_re_per_prb_tti)
        self.noise_mw = 0.0 if s.pure_sir else 10.0 ** (s.noise_dbm_per_prb / 10.0)
        self._noise_mw_la = 10.0 ** (s.noise_dbm_per_prb / 10.0)
        self.traffic = TrafficState(s.cell_count)
        self.counters = RunCounters()
        self.amp = 10.0 ** (self.topo.gain_db / 20.0)
        self.node_ant = np.where(np.arange(self.topo.n_cells + self.topo.n_ues)
                                 < self.topo.n_cells, s.bs_antennas, s.ue_antennas)

        self.gain_lin = 10.0 ** (self.topo.gain_db / 10.0)
        self.int_floor_mw = (0.0 if s.pure_sir else
                             self.noise_mw * 10.0 ** (s.interferer_floor_rel_noise_db / 10.0))

        bs_prb_dbm = s.bs_power_dbm - 10.0 * math.log10(s.prb_count)
        bs_prb_mw = 10.0 ** (bs_prb_dbm / 10.0)
        ue_mw = 10.0 ** (s.ue_power_dbm / 10.0)
        noise_dbm = s.noise_dbm_per_prb
        noise_mw_la = self._noise_mw_la
        C = s.cell_count
        # per-cell average uplink interference floor at each base station,
        # assuming every other cell has one full-power user on the same PRB
        ul_int_mw = np.zeros(C)
        for c in range(C):
            for c2 in range(C):
                if c2 == c:
                    continue
                ues2 = np.where(self.topo.ue_cell == c2)[0]
                if ues2.size:
                    g = np.mean(self.gain_lin[C + ues2, c])
                    ul_int_mw[c] += ue_mw * g
        self.macs: list[CellMac] = []
        for c in range(C):
            links = {}
            for ue in np.where(self.topo.ue_cell == c)[0]:
                node = self.topo.ue_node(int(ue))
                g = self.topo.gain_db[c, node]
                direction = int(self.topo.ue_dir[ue])
                if direction == DL:
                    p = bs_prb_dbm
                    interference = bs_prb_mw * (np.sum(self.gain_lin[:C, node])
                                                - self.gain_lin[c, node])
                else:
                    p = s.ue_power_dbm
                    interference = ul_int_mw[c]
                margin = 10.0 * math.log10((noise_mw_la + interference) / noise_mw_la)
                links[int(ue)] = (direction, p + g - noise_dbm,
                                  margin + s.olla_extra_init_db)
            self.macs.append(CellMac(c, s, self.table, self.traffic, links))

        self._gen_arrivals()
        self.offered = self._offered_load()

        # coordination state
        self.period_slots = round(s.rfc_update_period_ms / s.slot_ms)
        self.mu_samples: list[list] = [[] for _ in range(s.cell_count)]
        self.report_history: dict[int, list] = {}
        self.rfc_by_cell: list[RadioFrameConfig] = [self.rfc_set.default] * s.cell_count
        if s.tdd_policy == "static":
            static_rfc = coord.decide_common_rfc(
                [coord.RatioReport(c, None, -1) for c in range(s.cell_count)],
                self.policy, self.rfc_set).rfc_by_cell[0]
            self.static_rfc = static_rfc
        self.coordination_rows: list[CoordinationRow] = []
        self.rfc_histogram: dict[str, int] = {}
        self.records: list[LatencyRecord] = []
        self.trace_rows: list = []

    # -- setup helpers ------------------------------------------------------

    def _gen_arrivals(self):
        s, topo = self.s, self.topo
        rng = self.rngf.stream(STREAM_TRAFFIC)
        per_cell_times: list[list] = [[] for _ in range(s.cell_count)]
        per_cell_ues: list[list] = [[] for _ in range(s.cell_count)]
        for ue in range(topo.n_ues):
            lam_dl, lam_ul = s.cell_arrival_rates(int(topo.ue_drop_cell[ue]))
            lam = lam_dl if topo.ue_dir[ue] == DL else lam_ul
            times = generate_arrivals(rng, lam, s.sim_duration_ms)
            serving = int(topo.ue_cell[ue])
            per_cell_times[serving].append(times)
            per_cell_ues[serving].append(np.full(times.size, ue, dtype=np.int64))
        self.arrival_times = []
        self.arrival_ues = []
        self.arrival_ptr = [0] * s.cell_count
        for c in range(s.cell_count):
            if per_cell_times[c]:
                t = np.concatenate(per_cell_times[c])
                u = np.concatenate(per_cell_ues[c])
                order = np.argsort(t, kind="stable")
                self.arrival_times.append(t[order])
                self.arrival_ues.append(u[order])
            else:
                self.arrival_times.append(np.empty(0))
                self.arrival_ues.append(np.empty(0, dtype=np.int64))

    def _offered_load(self) -> np.ndarray:
        s, topo = self.s, self.topo
        offered = np.zeros((s.cell_count, 2))
        for ue in range(topo.n_ues):
            lam_dl, lam_ul = s.cell_arrival_rates(int(topo.ue_drop_cell[ue]))
            d = int(topo.ue_dir[ue])
            lam = lam_dl if d == DL else lam_ul
            size = s.payload_dl_bits if d == DL else s.payload_ul_bits
            offered[topo.ue_cell[ue], d] += lam * size
        return offered

    # -- coordination -------------------------------------------------------

    def _finalize_period(self, period: int, now_ms: float):
        s = self.s
        reports = []
        for c in range(s.cell_count):
            mu_bar = coord.frame_average(self.mu_samples[c])
            reports.append(coord.RatioReport(cell=c, mu_bar=mu_bar, frame=period,
                                             delivery_time_ms=now_ms + s.xn_delay_ms))
            self.mu_samples[c] = []
        self.report_history[period] = reports

    def _decide(self, period: int, now_ms: float):
        s = self.s
        if s.tdd_policy == "static":
            self.rfc_by_cell = [self.static_rfc] * s.cell_count
            theta, mus = self.policy.target_share, None
        else:
            usable = None
            for p in range(period - 1, -1, -1):
                if p in self.report_history and \
                        self.report_history[p][0].delivery_time_ms <= now_ms + 1e-9:
                    usable = p
                    break
            if usable is None:
                self.rfc_by_cell = [self.rfc_set.default] * s.cell_count
                theta, mus = None, None
            else:
                reports = self.report_history[usable]
                decision = coord.decide_common_rfc(reports, self.policy, self.rfc_set)
                self.rfc_by_cell = decision.rfc_by_cell
                theta = decision.theta
                mus = [r.mu_bar for r in reports]
        labels = tuple(r.ratio_label for r in self.rfc_by_cell)
        if self.aligned_mode and len(set(labels)) != 1:
            raise SimulationError(f"period {period}: aligned policy produced mixed RFCs")
        for lab in labels:
            self.rfc_histogram[lab] = self.rfc_histogram.get(lab, 0) + 1
        if s.coordination_trace:
            self.coordination_rows.append(
                CoordinationRow(period=period, mu_bars=mus, theta=theta, labels=labels))

    # -- main loop ------------------------------------------------------------

    def run(self) -> RunResult:
        s = self.s
        t_start = time.perf_counter()
        slot_ms = s.slot_ms
        total_ms = s.sim_duration_ms + s.drain_ms
        n_slots = math.ceil(total_ms / slot_ms)
        spf = s.slots_per_frame
        pid = 0
        prep_ms = s.prep_delay_symbols * s.symbol_ms

        for slot in range(n_slots):
            try:
                now_ms = slot * slot_ms
                if slot % self.period_slots == 0:
                    period = slot // self.period_slots
                    if period > 0:
                        self._finalize_period(period - 1, now_ms)
                    self._decide(period, now_ms)

                # deliver arrivals due on or before the slot start, then sample
                for c in range(s.cell_count):
                    pid = self._deliver(c, now_ms, pid, prep_ms)
                for c in range(s.cell_count):
                    z_dl, z_ul = self.traffic.sample_buffered(c)
                    self.mu_samples[c].append(coord.traffic_ratio(z_dl, z_ul))
                for c in range(s.cell_count):
                    pid = self._deliver(c, now_ms + slot_ms, pid, prep_ms)

                allocations = self._phase_a(slot, spf)
                if allocations:
                    self._phase_b(slot, allocations)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(
                    f"frame {slot // spf} slot {slot % spf}: {exc}") from exc

        self.traffic.check_conservation()
        return self._result(time.perf_counter() - t_start)

    def _deliver(self, cell: int, until_ms: float, pid: int, prep_ms: float) -> int:
        times = self.arrival_times[cell]
        ptr = self.arrival_ptr[cell]
        s = self.s
        mac = self.macs[cell]
        while ptr < times.size and times[ptr] < until_ms:
            ue = int(self.arrival_ues[cell][ptr])
            direction = int(self.topo.ue_dir[ue])
            t = float(times[ptr])
            size = s.payload_dl_bits if direction == DL else s.payload_ul_bits
            earliest = t + prep_ms
            if direction == UL and s.ul_report_delay_ms > 0:
                earliest = t + max(prep_ms, s.ul_report_delay_ms)
            mac.on_arrival(Packet(pid=pid, ue=ue, direction=direction, size_bits=size,
                                  remaining_bits=size, arrival_ms=t, earliest_tx_ms=earliest))
            pid += 1
            ptr += 1
        self.arrival_ptr[cell] = ptr
        return pid

    def _phase_a(self, slot: int, spf: int) -> list:
        allocations = []
        sym_ms = self.s.symbol_ms
        base_sym = slot * SYMBOLS_PER_SLOT
        for c in range(self.s.cell_count):
            mac = self.macs[c]
            for off, direction in self.rfc_by_cell[c].slots[slot % spf].blocks:
                self.counters.tti_count += 1
                t0 = base_sym + off
                txs = mac.schedule_tti(t0, t0 * sym_ms, direction)
                if txs:
                    allocations.extend(txs)
        return allocations

    def _phase_b(self, slot: int, allocations: list):
        s = self.s
        topo = self.topo
        n_cells = topo.n_cells
        rng = self.rngf.stream(STREAM_SLOT, slot)
        cache: dict = {}
        amp = self.amp
        node_ant = self.node_ant

        def chan(tx_node: int, rx_node: int, t0: int) -> np.ndarray:
            key = (tx_node, rx_node, t0)
            m = cache.get(key)
            if m is None:
                m = phy.draw_channel(int(node_ant[rx_node]), int(node_ant[tx_node]),
                                     amp[tx_node, rx_node], rng)
                cache[key] = m
            return m

        n_alloc = len(allocations)
        xs: list = [None] * n_alloc
        hs: list = [None] * n_alloc
        tx_nodes = [0] * n_alloc
        rx_nodes = [0] * n_alloc
        for i, tx in enumerate(allocations):
            ue_node = n_cells + tx.ue
            if tx.direction == DL:
                tn, rn = tx.cell, ue_node
            else:
                tn, rn = ue_node, tx.cell
            tx_nodes[i] = tn
            rx_nodes[i] = rn
            h = chan(tn, rn, tx.t0_sym)
            x = phy.precode(h)
            xs[i] = x
            hs[i] = math.sqrt(tx.power_per_prb_mw) * (h @ x)
        self.counters.tx_events += n_alloc

        # candidate interferers share the victim's TTI grid under an aligned
        # policy, so bucket by TTI start; flexible policies need the full scan
        buckets: dict | None = None
        if self.aligned_mode:
            buckets = {}
            for j, o in enumerate(allocations):
                buckets.setdefault(o.t0_sym, []).append(j)

        noise = self.noise_mw
        floor_mw = self.int_floor_mw
        gain_lin = self.gain_lin
        eesm_beta = s.eesm_beta
        margin_std = s.decode_margin_std_db
        thresholds = self.table.threshold_db
        max_explicit = s.max_explicit_interferers if noise > 0 else 10 ** 9
        for i, tx in enumerate(allocations):
            t0, t1 = tx.t0_sym, tx.t0_sym + 4
            lo_i, hi_i = tx.prb_lo, tx.prb_lo + tx.n_prb
            rn = rx_nodes[i]
            entries = []   # (mean power, j, t0_sym, prb lo, prb hi, is_cross)
            any_cross = False
            candidates = buckets[t0] if buckets is not None else range(n_alloc)
            for j in candidates:
                o = allocations[j]
                if o.cell == tx.cell:
                    continue
                if o.t0_sym >= t1 or o.t0_sym + 4 <= t0:
                    continue
                lo = lo_i if o.prb_lo <= lo_i else o.prb_lo
                hi = hi_i if o.prb_lo + o.n_prb >= hi_i else o.prb_lo + o.n_prb
                if lo >= hi:
                    continue
                p_mean = o.power_per_prb_mw * gain_lin[tx_nodes[j], rn]
                if p_mean < floor_mw:
                    continue  # buried well below the noise floor
                if o.direction == tx.direction:
                    entries.append((p_mean, j, o.t0_sym, lo, hi, False))
                elif self.aligned_mode:
                    raise SimulationError(
                        f"cell {tx.cell}: cross-direction overlap under an aligned policy")
                elif not self.cli_free:
                    entries.append((p_mean, j, o.t0_sym, lo, hi, True))
                    any_cross = True

            if not self.aligned_mode:
                self.counters.flexible_calls += 1
                if any_cross:
                    self.counters.flexible_with_cli += 1

            # model the strongest interferers exactly; fold the weak tail into
            # the noise floor at its mean power (fading is i.i.d., so the tail
            # covariance is white in expectation)
            noise_tb = noise
            if len(entries) > max_explicit:
                entries.sort(key=lambda t: (-t[0], t[1]))
                area = 4.0 * tx.n_prb
                for p_mean, _, s0, lo, hi, _ in entries[max_explicit:]:
                    sym_ov = min(t1, s0 + 4) - max(t0, s0)
                    noise_tb += p_mean * (sym_ov * (hi - lo)) / area
                entries = entries[:max_explicit]

            h = hs[i]
            if not entries:
                gamma_eff = float(np.vdot(h, h).real) / noise if noise > 0 else math.inf
            else:
                gamma_eff = self._tb_sinr(tx, h, entries, allocations, xs, chan,
                                          noise_tb, eesm_beta, rx_nodes[i], tx_nodes)
            success, tx.gamma_sum = phy.decode(gamma_eff, float(thresholds[tx.mcs]),
                                               tx.gamma_sum, rng, margin_std)
            if not success:
                self.counters.decode_failures += 1
            record = self.macs[tx.cell].on_decode(tx, success)
            if record is not None:
                self.records.append(record)
            if s.sinr_trace:
                self.trace_rows.append((slot, tx.cell, tx.ue, tx.direction, tx.mcs,
                                        gamma_eff, int(success)))

    def _tb_sinr(self, tx, h, entries, allocations, xs, chan,
                 noise, eesm_beta, rx_node, tx_nodes) -> float:
        """Effective SINR of one transport block under partial overlap.

        The block's PRB-symbol cells are grouped by their exact interferer
        subset (encoded as a bitmask over the entry list); one combiner and
        SINR is computed per distinct subset and the group SINRs are
        EESM-combined with their cell counts as weights.
        """
        t0, t1 = tx.t0_sym, tx.t0_sym + 4
        lo_i, hi_i = tx.prb_lo, tx.prb_lo + tx.n_prb
        n_e = len(entries)
        a_vecs = [None] * n_e
        for e, (_, j, _, _, _, _) in enumerate(entries):
            o = allocations[j]
            m = chan(tx_nodes[j], rx_node, t0)
            a_vecs[e] = math.sqrt(o.power_per_prb_mw) * (m @ xs[j])

        full_span = all(s0 <= t0 and s0 + 4 >= t1 for _, _, s0, _, _, _ in entries)
        groups: dict[int, int] = {}
        if full_span:
            for p in range(lo_i, hi_i):
                sig = 0
                for e in range(n_e):
                    if entries[e][3] <= p < entries[e][4]:
                        sig |= 1 << e
                groups[sig] = groups.get(sig, 0) + 1
        else:
            for k in range(t0, t1):
                for p in range(lo_i, hi_i):
                    sig = 0
                    for e in range(n_e):
                        ent = entries[e]
                        if ent[2] <= k < ent[2] + 4 and ent[3] <= p < ent[4]:
                            sig |= 1 << e
                    groups[sig] = groups.get(sig, 0) + 1

        gammas = np.empty(len(groups))
        weights = np.empty(len(groups))
        dim = h.shape[0]
        for g, (sig, w) in enumerate(groups.items()):
            if sig == 0:
                out = phy.mmse_sinr(h, None, None, noise)
            else:
                same_idx = []
                cross_idx = []
                for e in range(n_e):
                    if sig & (1 << e):
                        (cross_idx if entries[e][5] else same_idx).append(e)
                a_same = a_cross = None
                if same_idx:
                    a_same = np.empty((dim, len(same_idx)), dtype=complex)
                    for col, e in enumerate(same_idx):
                        a_same[:, col] = a_vecs[e]
                if cross_idx:
                    a_cross = np.empty((dim, len(cross_idx)), dtype=complex)
                    for col, e in enumerate(cross_idx):
                        a_cross[:, col] = a_vecs[e]
                out = phy.mmse_sinr(h, a_same, a_cross, noise)
            gammas[g] = out.gamma
            weights[g] = w
        if len(groups) == 1:
            return float(gammas[0])
        return phy.effective_sinr(gammas, eesm_beta, weights)

    # -- results ---------------------------------------------------------------

    def _result(self, runtime_s: float) -> RunResult:
        recs = self.records
        columns = {
            "pid": np.array([r.pid for r in recs], dtype=np.int64),
            "direction": np.array([r.direction for r in recs], dtype=np.int64),
            "cell": np.array([r.cell for r in recs], dtype=np.int64),
            "arrival_ms": np.array([r.arrival_ms for r in recs]),
            "total_ms": np.array([r.total_ms for r in recs]),
            "queuing_ms": np.array([r.queuing_ms for r in recs]),
            "tx_ms": np.array([r.tx_ms for r in recs]),
            "harq_ms": np.array([r.harq_ms for r in recs]),
            "processing_ms": np.array([r.processing_ms for r in recs]),
        }
        duration_s = self.s.sim_duration_ms / 1000.0
        carried = np.zeros((self.s.cell_count, 2))
        for c in range(self.s.cell_count):
            for d in (DL, UL):
                carried[c, d] = (self.traffic.completed_bits_by_cell[c][d]) / duration_s
        return RunResult(
            scenario=self.s, records=columns, counters=self.counters,
            coordination_rows=self.coordination_rows, rfc_histogram=self.rfc_histogram,
            generated=list(self.traffic.generated), completed=list(self.traffic.completed),
            dropped=list(self.traffic.dropped), residual=self.traffic.residual_packets(),
            generated_bits=list(self.traffic.generated_bits),
            completed_bits=list(self.traffic.completed_bits),
            dropped_bits=list(self.traffic.dropped_bits),
            offered_bits_per_s=self.offered, carried_bits_per_s=carried,
            runtime_s=runtime_s)


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario; deterministic for a fixed (scenario, seed)."""
    return _Simulation(scenario).run()


# -- result documents ----------------------------------------------------------

def write_run_result(result: RunResult, outdir) -> None:
    """Write scenario.resolved, latency.csv, ccdf.csv, summary.json and traces."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.resolved").write_text(scenario_to_text(result.scenario))

    cols = result.records
    with open(out / "latency.csv", "w") as f:
        f.write("pid,direction,cell,arrival_ms,total_ms,queuing_ms,tx_ms,harq_ms,processing_ms\n")
        for k in range(cols["pid"].size):
            f.write(f"{cols['pid'][k]},{DIR_NAMES[cols['direction'][k]]},{cols['cell'][k]},"
                    f"{cols['arrival_ms'][k]!r},{cols['total_ms'][k]!r},"
                    f"{cols['queuing_ms'][k]!r},{cols['tx_ms'][k]!r},"
                    f"{cols['harq_ms'][k]!r},{cols['processing_ms'][k]!r}\n")

    samples = result.samples()
    if samples.size:
        xs, exceed = stats.ccdf_table(samples)
        with open(out / "ccdf.csv", "w") as f:
            f.write("latency_ms,exceedance\n")
            for x, e in zip(xs, exceed):
                f.write(f"{x!r},{e!r}\n")

    (out / "summary.json").write_text(json.dumps(summarize(result), indent=2, sort_keys=True))

    if result.coordination_rows:
        n_cells = result.scenario.cell_count
        with open(out / "coordination_trace.csv", "w") as f:
            f.write("period," + ",".join(f"mu_bar_{c}" for c in range(n_cells))
                    + ",theta,rfc\n")
            for row in result.coordination_rows:
                mus = row.mu_bars if row.mu_bars is not None else [None] * n_cells
                mu_txt = ",".join("" if m is None else repr(m) for m in mus)
                theta_txt = "" if row.theta is None else repr(row.theta)
                label = row.labels[0] if len(set(row.labels)) == 1 else "|".join(row.labels)
                f.write(f"{row.period},{mu_txt},{theta_txt},{label}\n")


def summarize(result: RunResult) -> dict:
    s = result.scenario
    samples = result.samples()
    quantiles = {}
    for q in s.quantile_targets:
        if samples.size == 0:
            quantiles[f"{q:g}"] = None
            continue
        import warnings as _warnings
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            est = stats.outage_latency(samples, q)
        quantiles[f"{q:g}"] = {
            "latency_ms": est.value_ms, "ci_low_ms": est.ci_low_ms,
            "ci_high_ms": est.ci_high_ms, "n_samples": est.n_samples,
            "insufficient_support": est.insufficient_support,
        }
    return {
        "policy": s.tdd_policy,
        "seed": s.seed,
        "sim_duration_ms": s.sim_duration_ms,
        "n_latency_samples": int(samples.size),
        "outage_latency": quantiles,
        "generated": {DIR_NAMES[d]: result.generated[d] for d in (0, 1)},
        "completed": {DIR_NAMES[d]: result.completed[d] for d in (0, 1)},
        "dropped": {DIR_NAMES[d]: result.dropped[d] for d in (0, 1)},
        "residual": result.residual,
        "drop_rate": result.drop_rate,
        "offered_mbps_per_cell": {
            DIR_NAMES[d]: float(np.mean(result.offered_bits_per_s[:, d])) / 1e6
            for d in (0, 1)},
        "carried_mbps_per_cell": {
            DIR_NAMES[d]: float(np.mean(result.carried_bits_per_s[:, d])) / 1e6
            for d in (0, 1)},
        "offered_bits_per_s_by_cell": result.offered_bits_per_s.tolist(),
        "carried_bits_per_s_by_cell": result.carried_bits_per_s.tolist(),
        "rfc_histogram": result.rfc_histogram,
        "counters": {
            "tti_count": result.counters.tti_count,
            "tx_events": result.counters.tx_events,
            "flexible_calls": result.counters.flexible_calls,
            "flexible_with_cli": result.counters.flexible_with_cli,
            "decode_failures": result.counters.decode_failures,
        },
        "runtime_s": result.runtime_s,
    }
