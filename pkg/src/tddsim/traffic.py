"""Sporadic packet traffic and per-cell buffer accounting.

Every user receives (DL) or sources (UL) fixed-size payloads arriving as an
independent Poisson process.  Buffers live at the serving cell: DL packets
queue at the base station, UL packets are known to the scheduler the instant
they hit the user's PDCP layer (fast dynamic grant; an optional reporting
delay can defer that knowledge).  Per-cell buffered-bit totals, sampled once
per slot, feed the frame-configuration coordination.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

DL, UL = 0, 1
DIR_NAMES = ("dl", "ul")


@dataclass(slots=True)
class Packet:
    pid: int
    ue: int
    direction: int
    size_bits: int
    remaining_bits: int
    arrival_ms: float
    earliest_tx_ms: float
    first_tx_ms: float = -1.0
    completion_ms: float = -1.0
    harq_attempts: int = 0     # attempts consumed by the current transport block
    tx_count: int = 0          # air transmissions over all blocks and attempts


def generate_arrivals(rng: np.random.Generator, rate_per_s: float,
                      horizon_ms: float) -> np.ndarray:
    """Poisson arrival instants (ms) over [0, horizon_ms)."""
    if rate_per_s < 0:
        raise ValueError("arrival rate must be >= 0")
    if horizon_ms <= 0:
        raise ValueError("horizon must be > 0")
    if rate_per_s == 0:
        return np.empty(0)
    scale_ms = 1000.0 / rate_per_s
    chunks = []
    t = 0.0
    n_guess = max(16, int(horizon_ms / scale_ms * 1.25) + 16)
    while t < horizon_ms:
        gaps = rng.exponential(scale_ms, n_guess)
        times = t + np.cumsum(gaps)
        chunks.append(times[times < horizon_ms])
        t = times[-1]
    return np.concatenate(chunks)


@dataclass
class CellBuffers:
    """Per-user FIFO queues of one cell, with exact buffered-bit totals."""

    queues: dict = field(default_factory=dict)   # ue -> deque[Packet]
    z_bits: list = field(default_factory=lambda: [0, 0])  # [DL, UL]

    def queue(self, ue: int) -> deque:
        q = self.queues.get(ue)
        if q is None:
            q = deque()
            self.queues[ue] = q
        return q


class TrafficState:
    """All cells' buffers plus run-wide conservation counters."""

    def __init__(self, n_cells: int):
        self.cells = [CellBuffers() for _ in range(n_cells)]
        self.generated = [0, 0]
        self.completed = [0, 0]
        self.dropped = [0, 0]
        self.generated_bits = [0, 0]
        self.completed_bits = [0, 0]
        self.dropped_bits = [0, 0]
        self.completed_bits_by_cell = [[0, 0] for _ in range(n_cells)]

    def push(self, cell: int, packet: Packet) -> None:
        buf = self.cells[cell]
        buf.queue(packet.ue).append(packet)
        buf.z_bits[packet.direction] += packet.remaining_bits
        self.generated[packet.direction] += 1
        self.generated_bits[packet.direction] += packet.size_bits

    def serve_bits(self, cell: int, packet: Packet, bits: int) -> None:
        packet.remaining_bits -= bits
        if packet.remaining_bits < 0:
            raise RuntimeError("served more bits than remained")
        self.cells[cell].z_bits[packet.direction] -= bits

    def complete(self, cell: int, packet: Packet) -> None:
        buf = self.cells[cell]
        head = buf.queue(packet.ue).popleft()
        if head is not packet:
            raise RuntimeError("completion out of order")
        self.completed[packet.direction] += 1
        self.completed_bits[packet.direction] += packet.size_bits
        self.completed_bits_by_cell[cell][packet.direction] += packet.size_bits

    def drop(self, cell: int, packet: Packet) -> None:
        buf = self.cells[cell]
        head = buf.queue(packet.ue).popleft()
        if head is not packet:
            raise RuntimeError("drop out of order")
        buf.z_bits[packet.direction] -= packet.remaining_bits
        self.dropped[packet.direction] += 1
        self.dropped_bits[packet.direction] += packet.size_bits

    def sample_buffered(self, cell: int) -> tuple[int, int]:
        """Exact (DL, UL) buffered bits of one cell; never mutates queues."""
        z = self.cells[cell].z_bits
        return z[DL], z[UL]

    def residual_packets(self) -> int:
        return sum(len(q) for buf in self.cells for q in buf.queues.values())

    def residual_bits(self) -> int:
        return sum(p.remaining_bits for buf in self.cells
                   for q in buf.queues.values() for p in q)

    def recount_buffered(self, cell: int) -> tuple[int, int]:
        """Recompute the totals from scratch (accounting cross-check)."""
        z = [0, 0]
        for q in self.cells[cell].queues.values():
            for p in q:
                z[p.direction] += p.remaining_bits
        return z[DL], z[UL]

    def check_conservation(self) -> None:
        for d in (DL, UL):
            residual = sum(1 for buf in self.cells for q in buf.queues.values()
                           for p in q if p.direction == d)
            if self.generated[d] != self.completed[d] + self.dropped[d] + residual:
                raise RuntimeError(
                    f"packet conservation broken for {DIR_NAMES[d]}: "
                    f"{self.generated[d]} generated != {self.completed[d]} completed "
                    f"+ {self.dropped[d]} dropped + {residual} residual")
