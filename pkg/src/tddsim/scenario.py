"""Scenario configuration and deployment geometry.

A scenario is a flat key/value document (one ``key = value`` per line, ``#``
comments) layered over the defaults below, which describe a 21-cell macro
cluster: 10 MHz TDD carrier at 3.5 GHz with 30 kHz subcarrier spacing, 8 BS /
2 UE antennas, 10 DL + 10 UL users per cell with 400-bit sporadic payloads.

Topology construction drops cells on a hexagonal site grid (three cell
centroids per site), places users uniformly in an annulus around their cell,
and freezes a complete large-scale gain table (log-distance pathloss plus
lognormal shadowing) over every node pair: BS-UE, UE-BS, BS-BS and UE-UE.
BS-BS pairs use a lower pathloss exponent, reflecting the elevated,
near-line-of-sight coupling between macro sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
FRAME_MS = 10.0

# stream tags for the per-run random stream factory
STREAM_TOPOLOGY = 1
STREAM_TRAFFIC = 2
STREAM_SLOT = 3


class ScenarioError(ValueError):
    """Malformed scenario document or invariant violation."""


@dataclass(frozen=True)
class Scenario:
    # deployment
    cell_count: int = 21
    inter_site_distance_m: float = 500.0
    sectors_per_site: int = 3
    cell_radius_m: float = 0.0           # 0 = auto (inter-site distance / 3)
    min_ue_distance_m: float = 35.0
    ue_per_cell_dl: int = 10
    ue_per_cell_ul: int = 10
    # radio
    bs_antennas: int = 8
    ue_antennas: int = 2
    bandwidth_hz: float = 10e6
    scs_hz: float = 30e3
    carrier_freq_hz: float = 3.5e9
    n_prb: int = 0                       # 0 = auto from bandwidth and SCS
    bs_power_dbm: float = 46.0
    ue_power_dbm: float = 23.0
    noise_figure_db: float = 9.0
    pathloss_exponent: float = 3.76
    bs_bs_pathloss_exponent: float = 2.5
    ref_distance_m: float = 35.0
    shadowing_std_db: float = 8.0
    pure_sir: bool = False               # drop noise in the receiver equations
    # traffic
    payload_dl_bits: int = 400
    payload_ul_bits: int = 400
    arrival_rate_dl: float = 125.0       # packets/s per DL user
    arrival_rate_ul: float = 125.0       # packets/s per UL user
    cell_ratio_pattern: str = "uniform"  # or "alternating" per-cell DL:UL skew
    pattern_dl_share: float = 0.75       # DL share of odd cells when alternating
    ul_report_delay_ms: float = 0.0
    # TDD policy
    tdd_policy: str = "proposed"         # proposed | static | dynamic
    static_alpha: float = 0.0
    static_bias: str = "dl"
    dynamic_cli_free: bool = False
    beta_hat: float = 0.9
    beta_max: float = 100.0
    balance_use_empirical_mean: bool = False
    kaiser_mirrored: bool = True
    rfc_update_period_ms: float = 10.0
    rfc_ratios: str = "1:4,1:3,1:2,1:1,2:1,3:1,4:1"
    xn_delay_ms: float = 0.0
    # timing
    prep_delay_symbols: float = 3.0
    pdsch_decode_symbols: float = 4.5
    pusch_decode_symbols: float = 5.5
    # MAC / link adaptation
    harq_max_attempts: int = 4
    pf_window_ttis: int = 100
    olla_target_bler: float = 0.1
    olla_step_db: float = 0.2
    olla_extra_init_db: float = 0.0   # added to the geometry-derived initial margin
    eesm_beta: float = 1.0
    decode_margin_std_db: float = 1.0
    mcs_shannon_gap_db: float = 2.0
    data_re_per_prb_tti: int = 48
    interferer_floor_rel_noise_db: float = -12.0  # ignore interferers this far below noise
    max_explicit_interferers: int = 6             # strongest modeled exactly, rest whitened
    prb_alloc_granularity: int = 2                # PRBs are granted in groups of this size
    # run control
    sim_duration_ms: float = 1000.0
    warmup_ms: float = 100.0
    drain_ms: float = 50.0
    seed: int = 1
    quantile_targets: tuple = (1e-2, 1e-3)
    coordination_trace: bool = False
    sinr_trace: bool = False

    # -- derived quantities ------------------------------------------------

    @property
    def slot_ms(self) -> float:
        return 15_000.0 / self.scs_hz

    @property
    def symbol_ms(self) -> float:
        return self.slot_ms / 14.0

    @property
    def slots_per_frame(self) -> int:
        return round(FRAME_MS / self.slot_ms)

    @property
    def prb_count(self) -> int:
        if self.n_prb > 0:
            return self.n_prb
        # 86.4% spectral occupancy reproduces the standard 24-PRB grid for
        # 10 MHz at 30 kHz SCS
        return max(1, int(self.bandwidth_hz * 0.864 / (12.0 * self.scs_hz)))

    @property
    def prb_bandwidth_hz(self) -> float:
        return 12.0 * self.scs_hz

    @property
    def noise_dbm_per_prb(self) -> float:
        return -174.0 + 10.0 * math.log10(self.prb_bandwidth_hz) + self.noise_figure_db

    @property
    def resolved_cell_radius_m(self) -> float:
        return self.cell_radius_m if self.cell_radius_m > 0 else self.inter_site_distance_m / 3.0

    def cell_dl_share(self, cell: int) -> float:
        """Long-run offered DL share of one cell under the ratio pattern."""
        base = self.offered_dl_share_uniform
        if self.cell_ratio_pattern == "uniform":
            return base
        return self.pattern_dl_share if cell % 2 == 0 else 1.0 - self.pattern_dl_share

    @property
    def offered_dl_share_uniform(self) -> float:
        dl = self.ue_per_cell_dl * self.payload_dl_bits * self.arrival_rate_dl
        ul = self.ue_per_cell_ul * self.payload_ul_bits * self.arrival_rate_ul
        return 0.5 if dl + ul == 0 else dl / (dl + ul)

    @property
    def offered_dl_share(self) -> float:
        """Cluster-wide offered DL share (pattern-aware long-run average)."""
        if self.cell_ratio_pattern == "uniform":
            return self.offered_dl_share_uniform
        shares = [self.cell_dl_share(c) for c in range(self.cell_count)]
        return float(np.mean(shares))

    def cell_arrival_rates(self, cell: int) -> tuple[float, float]:
        """Per-user (DL, UL) packet rates of one cell under the ratio pattern."""
        if self.cell_ratio_pattern == "uniform":
            return self.arrival_rate_dl, self.arrival_rate_ul
        # redistribute the cell's total offered bit rate at the pattern share,
        # keeping user counts and payload sizes fixed
        total = (self.ue_per_cell_dl * self.payload_dl_bits * self.arrival_rate_dl
                 + self.ue_per_cell_ul * self.payload_ul_bits * self.arrival_rate_ul)
        share = self.cell_dl_share(cell)
        lam_dl = total * share / max(1, self.ue_per_cell_dl) / self.payload_dl_bits
        lam_ul = total * (1.0 - share) / max(1, self.ue_per_cell_ul) / self.payload_ul_bits
        return lam_dl, lam_ul

    def validate(self) -> None:
        def req(cond: bool, name: str, why: str):
            if not cond:
                raise ScenarioError(f"{name}: {why}")

        req(self.cell_count >= 1, "cell_count", "must be >= 1")
        req(self.ue_per_cell_dl >= 0, "ue_per_cell_dl", "must be >= 0")
        req(self.ue_per_cell_ul >= 0, "ue_per_cell_ul", "must be >= 0")
        req(self.bs_antennas >= 1, "bs_antennas", "must be >= 1")
        req(self.ue_antennas >= 1, "ue_antennas", "must be >= 1")
        for name in ("inter_site_distance_m", "bandwidth_hz", "scs_hz", "carrier_freq_hz",
                     "payload_dl_bits", "payload_ul_bits", "rfc_update_period_ms",
                     "sim_duration_ms", "pf_window_ttis", "eesm_beta"):
            req(getattr(self, name) > 0, name, "must be > 0")
        for name in ("arrival_rate_dl", "arrival_rate_ul", "xn_delay_ms", "warmup_ms",
                     "drain_ms", "ul_report_delay_ms", "prep_delay_symbols",
                     "pdsch_decode_symbols", "pusch_decode_symbols"):
            req(getattr(self, name) >= 0, name, "must be >= 0")
        req(0.0 <= self.beta_hat <= 1.0, "beta_hat", "must be in [0, 1]")
        req(self.beta_max >= 0, "beta_max", "must be >= 0")
        req(0.0 <= self.static_alpha <= 1.0, "static_alpha", "must be in [0, 1]")
        req(self.static_bias in ("dl", "ul"), "static_bias", "must be 'dl' or 'ul'")
        req(self.tdd_policy in ("proposed", "static", "dynamic"), "tdd_policy",
            "must be proposed, static or dynamic")
        req(self.cell_ratio_pattern in ("uniform", "alternating"), "cell_ratio_pattern",
            "must be uniform or alternating")
        req(0.0 < self.pattern_dl_share < 1.0, "pattern_dl_share", "must be in (0, 1)")
        req(all(0.0 < q < 1.0 for q in self.quantile_targets), "quantile_targets",
            "entries must be in (0, 1)")
        req(self.harq_max_attempts >= 1, "harq_max_attempts", "must be >= 1")
        req(self.seed >= 0, "seed", "must be a non-negative integer")
        req(0.0 < self.olla_target_bler < 1.0, "olla_target_bler", "must be in (0, 1)")
        req(abs(self.slots_per_frame * self.slot_ms - FRAME_MS) < 1e-9, "scs_hz",
            "slot duration must divide the 10 ms frame")
        req(abs(self.rfc_update_period_ms % FRAME_MS) < 1e-9, "rfc_update_period_ms",
            "must be a multiple of the 10 ms frame")


# -- document parsing --------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_value(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if ftype == "bool":
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ScenarioError(f"{key}: {raw!r} is not a boolean")
    if ftype == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ScenarioError(f"{key}: {raw!r} is not an integer") from exc
    if ftype == "float":
        try:
            return float(raw)
        except ValueError as exc:
            raise ScenarioError(f"{key}: {raw!r} is not a number") from exc
    if ftype == "tuple":
        try:
            return tuple(float(part) for part in raw.split(",") if part.strip())
        except ValueError as exc:
            raise ScenarioError(f"{key}: {raw!r} is not a comma list of numbers") from exc
    return raw


def parse_overrides(pairs) -> dict:
    """Parse ``key=value`` strings (CLI --set arguments) into typed fields."""
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ScenarioError(f"override {pair!r} is not of the form key=value")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ScenarioError(f"unknown scenario key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def load_scenario(text: str, overrides: dict | None = None) -> Scenario:
    """Build a validated Scenario from a key/value document plus overrides."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ScenarioError(f"line {lineno}: unknown scenario key {key!r}")
        values[key] = _parse_value(key, raw)
    if overrides:
        values.update(overrides)
    scenario = Scenario(**values)
    scenario.validate()
    return scenario


def scenario_to_text(s: Scenario) -> str:
    """Echo the fully resolved configuration, one key per line."""
    lines = []
    for f in fields(Scenario):
        value = getattr(s, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# -- random streams ----------------------------------------------------------

class RngFactory:
    """Named, decorrelated random streams derived from one master seed.

    Streams are keyed by integer tags; (seed, tag, ...) feeds a SeedSequence,
    so every stream is reproducible and independent of creation order.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, *tags: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence((self.seed, *tags)))


def replication_seed(base_seed: int, point_index: int, replication: int) -> int:
    """Derived 63-bit seed for one sweep point / replication (seed splitting)."""
    ss = np.random.SeedSequence((int(base_seed), int(point_index), int(replication)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


# -- topology ----------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    cell_xy: np.ndarray        # (C, 2) meters
    ue_xy: np.ndarray          # (N, 2) meters
    ue_cell: np.ndarray        # (N,) serving cell per UE
    ue_dir: np.ndarray         # (N,) 0 = DL user, 1 = UL user
    ue_drop_cell: np.ndarray   # (N,) cell whose area the UE was dropped in
    gain_db: np.ndarray        # (C+N, C+N) large-scale gain, symmetric

    @property
    def n_cells(self) -> int:
        return self.cell_xy.shape[0]

    @property
    def n_ues(self) -> int:
        return self.ue_xy.shape[0]

    def bs_node(self, cell: int) -> int:
        return cell

    def ue_node(self, ue: int) -> int:
        return self.n_cells + ue

    def cell_ues(self, cell: int, direction: int) -> np.ndarray:
        return np.where((self.ue_cell == cell) & (self.ue_dir == direction))[0]


def _hex_sites(n_sites: int, isd: float) -> np.ndarray:
    """Site positions on a hexagonal grid: center first, then rings."""
    dirs = [(1.0, 0.0), (0.5, math.sqrt(3) / 2), (-0.5, math.sqrt(3) / 2),
            (-1.0, 0.0), (-0.5, -math.sqrt(3) / 2), (0.5, -math.sqrt(3) / 2)]
    sites = [(0.0, 0.0)]
    ring = 1
    while len(sites) < n_sites:
        x, y = dirs[4][0] * isd * ring, dirs[4][1] * isd * ring
        for d in range(6):
            for _ in range(ring):
                sites.append((x, y))
                x += dirs[d][0] * isd
                y += dirs[d][1] * isd
        ring += 1
    return np.array(sites[:n_sites])


def free_space_pathloss_db(distance_m: float, freq_hz: float) -> float:
    return 20.0 * math.log10(4.0 * math.pi * distance_m * freq_hz / SPEED_OF_LIGHT)


def build_topology(s: Scenario, rng: np.random.Generator) -> Topology:
    """Construct the cell/UE layout and the frozen large-scale gain table."""
    sectors = max(1, s.sectors_per_site)
    n_sites = math.ceil(s.cell_count / sectors)
    sites = _hex_sites(n_sites, s.inter_site_distance_m)

    cells = []
    offset = 0.0 if sectors == 1 else s.inter_site_distance_m / 3.0
    for site in sites:
        for j in range(sectors):
            ang = 2.0 * math.pi * j / sectors + math.pi / 6.0
            cells.append((site[0] + offset * math.cos(ang), site[1] + offset * math.sin(ang)))
            if len(cells) == s.cell_count:
                break
        if len(cells) == s.cell_count:
            break
    cell_xy = np.array(cells)

    k_total = s.ue_per_cell_dl + s.ue_per_cell_ul
    n_ues = s.cell_count * k_total
    ue_xy = np.zeros((n_ues, 2))
    ue_dir = np.zeros(n_ues, dtype=np.int64)
    ue_drop = np.zeros(n_ues, dtype=np.int64)
    r_min, r_max = s.min_ue_distance_m, s.resolved_cell_radius_m
    if r_max <= r_min:
        raise ScenarioError("cell_radius_m: must exceed min_ue_distance_m")
    idx = 0
    for c in range(s.cell_count):
        for k in range(k_total):
            r = math.sqrt(rng.uniform(r_min ** 2, r_max ** 2))
            ang = rng.uniform(0.0, 2.0 * math.pi)
            ue_xy[idx] = cell_xy[c] + (r * math.cos(ang), r * math.sin(ang))
            ue_dir[idx] = 0 if k < s.ue_per_cell_dl else 1
            ue_drop[idx] = c
            idx += 1

    n_nodes = s.cell_count + n_ues
    xy = np.vstack([cell_xy, ue_xy])
    is_bs = np.zeros(n_nodes, dtype=bool)
    is_bs[:s.cell_count] = True

    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=-1))
    np.fill_diagonal(dist, s.ref_distance_m)
    dist = np.maximum(dist, s.ref_distance_m)

    exponent = np.full((n_nodes, n_nodes), s.pathloss_exponent)
    bs_pair = np.outer(is_bs, is_bs)
    exponent[bs_pair] = s.bs_bs_pathloss_exponent

    pl0 = free_space_pathloss_db(s.ref_distance_m, s.carrier_freq_hz)
    pathloss = pl0 + 10.0 * exponent * np.log10(dist / s.ref_distance_m)

    shadow = rng.normal(0.0, s.shadowing_std_db, size=(n_nodes, n_nodes))
    shadow = np.triu(shadow, 1)
    shadow = shadow + shadow.T

    gain_db = -(pathloss + shadow)
    np.fill_diagonal(gain_db, -300.0)

    # attach by strongest BS-UE gain; ties resolve to the lowest cell id
    bs_to_ue = gain_db[:s.cell_count, s.cell_count:]
    ue_cell = np.argmax(bs_to_ue, axis=0).astype(np.int64)

    return Topology(cell_xy=cell_xy, ue_xy=ue_xy, ue_cell=ue_cell, ue_dir=ue_dir,
                    ue_drop_cell=ue_drop, gain_db=gain_db)
