"""System-level simulator for traffic-adaptive TDD frame selection.

A discrete-time model of a macro TDD cell cluster: sporadic fixed-size
packet traffic, per-TTI proportional-fair scheduling inside the active frame
configuration, MMSE-IRC receivers with explicit cross-direction interference,
Chase-combining HARQ, and per-packet one-way latency with tail (CCDF)
statistics.  Frame configurations are selected per update period either by a
cluster-common rule driven by Kaiser-filtered buffered-traffic reports, by a
fixed configuration, or independently per cell.
"""

from .coordination import (DynamicTdd, KaiserWindow, Proposed, RatioReport, StaticTdd,
                           compute_theta, decide_common_rfc, filter_theta, frame_average,
                           kaiser_weights, sort_reports, traffic_ratio)
from .engine import RunResult, run, summarize, write_run_result
from .frame import (RadioFrameConfig, RfcSet, SlotFormat, build_rfc, build_slot_pattern,
                    format_slot, make_rfc_set, quantize_theta)
from .phy import (LinkRealization, McsTable, decode, draw_channel, draw_channels,
                  effective_sinr, make_mcs_table, post_sinr, precode)
from .scenario import (RngFactory, Scenario, ScenarioError, Topology, build_topology,
                       load_scenario, parse_overrides, replication_seed, scenario_to_text)
from .stats import OutageEstimate, ccdf, confidently_below, exceedance_at, outage_latency
from .sweep import SweepResult, sweep
from .traffic import Packet, TrafficState, generate_arrivals

__version__ = "0.1.0"

__all__ = [
    "DynamicTdd", "KaiserWindow", "Proposed", "RatioReport", "StaticTdd",
    "compute_theta", "decide_common_rfc", "filter_theta", "frame_average",
    "kaiser_weights", "sort_reports", "traffic_ratio",
    "RunResult", "run", "summarize", "write_run_result",
    "RadioFrameConfig", "RfcSet", "SlotFormat", "build_rfc", "build_slot_pattern",
    "format_slot", "make_rfc_set", "quantize_theta",
    "LinkRealization", "McsTable", "decode", "draw_channel", "draw_channels",
    "effective_sinr", "make_mcs_table", "post_sinr", "precode",
    "RngFactory", "Scenario", "ScenarioError", "Topology", "build_topology",
    "load_scenario", "parse_overrides", "replication_seed", "scenario_to_text",
    "OutageEstimate", "ccdf", "confidently_below", "exceedance_at", "outage_latency",
    "SweepResult", "sweep",
    "Packet", "TrafficState", "generate_arrivals",
]
