"""Slot formats and radio frame configurations.

A slot is 14 OFDM symbols over the alphabet {D, U, F}: downlink, uplink and
flexible (guard/idle) symbols.  D and U symbols come in 4-symbol blocks; one
block is one transmit-time interval (TTI).  Switching from a D block to a U
block costs one F guard symbol; U to D switches immediately.  Leftover
symbols at the end of a slot are F-padded.

A radio frame configuration (RFC) is a sequence of slot formats covering one
frame (20 slots at 30 kHz subcarrier spacing).  DL and UL blocks are spread
over the frame with a deterministic quota scheme so the aggregate D:U symbol
ratio tracks a target label such as ``2:1``, and both directions show up in
every half frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SYMBOLS_PER_SLOT = 14
BLOCK_SYMBOLS = 4
MAX_BLOCKS_PER_SLOT = 3

# symbol codes
D, U, F = 0, 1, 2
SYMBOL_CHARS = "DUF"


class SlotCapacityError(ValueError):
    """Requested blocks plus guards do not fit in a 14-symbol slot."""


@dataclass(frozen=True)
class SlotFormat:
    """One 14-symbol slot: symbol codes plus the TTI blocks it contains."""

    symbols: tuple[int, ...]
    blocks: tuple[tuple[int, int], ...]  # (start symbol, direction) per block

    @property
    def dl_symbols(self) -> int:
        return self.symbols.count(D)

    @property
    def ul_symbols(self) -> int:
        return self.symbols.count(U)

    def __str__(self) -> str:
        return format_slot(self)


def format_slot(sf: SlotFormat) -> str:
    """Render a slot as the bracketed symbol string, e.g. [DDDDFUUUUDDDDF]."""
    return "[" + "".join(SYMBOL_CHARS[s] for s in sf.symbols) + "]"


def validate_slot_format(sf: SlotFormat) -> None:
    """Check the block/guard structure; raises ValueError on violation.

    Rules: exactly 14 symbols; every maximal D or U run is a whole number of
    4-symbol blocks; a D run is never immediately followed by a U run (one F
    guard minimum in between).  U followed directly by D is legal.
    """
    if len(sf.symbols) != SYMBOLS_PER_SLOT:
        raise ValueError(f"slot has {len(sf.symbols)} symbols, expected {SYMBOLS_PER_SLOT}")
    runs: list[tuple[int, int]] = []  # (code, length)
    for s in sf.symbols:
        if runs and runs[-1][0] == s:
            runs[-1] = (s, runs[-1][1] + 1)
        else:
            runs.append((s, 1))
    for code, length in runs:
        if code != F and length % BLOCK_SYMBOLS != 0:
            raise ValueError(f"{SYMBOL_CHARS[code]} run of length {length} is not whole blocks")
    for (a, _), (b, _) in zip(runs, runs[1:]):
        if a == D and b == U:
            raise ValueError("D block switches to U without an F guard")
    starts = {start for start, _ in sf.blocks}
    for start, direction in sf.blocks:
        run = sf.symbols[start:start + BLOCK_SYMBOLS]
        if set(run) != {direction}:
            raise ValueError(f"block at {start} does not match its direction")
    if len(starts) != len(sf.blocks):
        raise ValueError("duplicate block starts")


def build_slot_pattern(dl_blocks: int, ul_blocks: int) -> SlotFormat:
    """Lay out ``dl_blocks`` D and ``ul_blocks`` U 4-symbol blocks in one slot.

    Blocks alternate direction, starting with D when ``dl_blocks >=
    ul_blocks``; a lone F guard is inserted at every D-to-U switch and the
    remainder of the slot is F-padded.  Raises :class:`SlotCapacityError`
    when the layout exceeds 14 symbols (more than three blocks).
    """
    if dl_blocks < 0 or ul_blocks < 0:
        raise ValueError("block counts must be non-negative")
    total = dl_blocks + ul_blocks
    if total < 1:
        raise ValueError("at least one block required")
    if total > MAX_BLOCKS_PER_SLOT:
        raise SlotCapacityError(
            f"{total} blocks cannot fit in a {SYMBOLS_PER_SLOT}-symbol slot with guards"
        )

    order: list[int] = []
    remaining = {D: dl_blocks, U: ul_blocks}
    current = D if dl_blocks >= ul_blocks else U
    while remaining[D] + remaining[U] > 0:
        if remaining[current] == 0:
            current = D if current == U else U
        order.append(current)
        remaining[current] -= 1
        if remaining[D if current == U else U] > 0:
            current = D if current == U else U

    symbols: list[int] = []
    blocks: list[tuple[int, int]] = []
    prev = None
    for direction in order:
        if prev == D and direction == U:
            symbols.append(F)
        blocks.append((len(symbols), direction))
        symbols.extend([direction] * BLOCK_SYMBOLS)
        prev = direction
    if len(symbols) > SYMBOLS_PER_SLOT:
        raise SlotCapacityError("blocks plus guards exceed the slot")
    symbols.extend([F] * (SYMBOLS_PER_SLOT - len(symbols)))
    return SlotFormat(symbols=tuple(symbols), blocks=tuple(blocks))


@dataclass(frozen=True)
class RadioFrameConfig:
    """A frame-long sequence of slot formats with its aggregate symbol counts."""

    slots: tuple[SlotFormat, ...]
    d_count: int
    u_count: int
    ratio_label: str

    @property
    def dl_fraction(self) -> float:
        return self.d_count / (self.d_count + self.u_count)

    @property
    def slots_per_frame(self) -> int:
        return len(self.slots)

    def block_schedule(self, slot_index: int) -> tuple[tuple[int, int], ...]:
        """TTI blocks (start symbol, direction) of one slot of the frame."""
        return self.slots[slot_index].blocks

    def __str__(self) -> str:
        return f"RFC {self.ratio_label}: " + " ".join(format_slot(s) for s in self.slots)


def parse_ratio(label: str) -> tuple[int, int]:
    try:
        d_part, u_part = label.split(":")
        d, u = int(d_part), int(u_part)
    except ValueError as exc:
        raise ValueError(f"bad ratio label {label!r}, expected like '2:1'") from exc
    if d <= 0 or u <= 0:
        raise ValueError(f"ratio {label!r} must keep both directions positive")
    return d, u


def build_rfc(ratio: str | tuple[int, int], slots_per_frame: int) -> RadioFrameConfig:
    """Distribute D/U blocks over a frame so the symbol ratio tracks ``ratio``.

    Uses a cumulative-quota (largest remainder) assignment slot by slot: after
    slot s the number of D blocks equals round(3 * (s+1) * dl_share), which
    spreads both directions evenly and guarantees each appears in every half
    frame for the supported ratio range.
    """
    if slots_per_frame < 1:
        raise ValueError("slots_per_frame must be >= 1")
    d, u = parse_ratio(ratio) if isinstance(ratio, str) else ratio
    label = f"{d}:{u}"
    dl_share = d / (d + u)
    blocks_per_slot = MAX_BLOCKS_PER_SLOT

    slots = []
    assigned_dl = 0
    for s in range(slots_per_frame):
        target = int((s + 1) * blocks_per_slot * dl_share + 0.5)
        n_dl = min(blocks_per_slot, max(0, target - assigned_dl))
        assigned_dl += n_dl
        slots.append(build_slot_pattern(n_dl, blocks_per_slot - n_dl))

    d_count = sum(sf.dl_symbols for sf in slots)
    u_count = sum(sf.ul_symbols for sf in slots)
    if d_count == 0 or u_count == 0:
        raise ValueError(f"ratio {label} starves one direction at {slots_per_frame} slots")
    if slots_per_frame >= 2:
        half = slots_per_frame // 2
        for half_slots in (slots[:half], slots[half:]):
            dirs = {direction for sf in half_slots for _, direction in sf.blocks}
            if dirs != {D, U}:
                raise ValueError(f"ratio {label}: a half frame misses one direction")
    return RadioFrameConfig(slots=tuple(slots), d_count=d_count, u_count=u_count,
                            ratio_label=label)


DEFAULT_RATIOS = ("1:4", "1:3", "1:2", "1:1", "2:1", "3:1", "4:1")


@dataclass(frozen=True)
class RfcSet:
    """Ordered set of candidate RFCs, ascending in DL fraction."""

    members: tuple[RadioFrameConfig, ...]
    default_index: int = field(default=-1)

    def __post_init__(self):
        fracs = [m.dl_fraction for m in self.members]
        if any(b <= a for a, b in zip(fracs, fracs[1:])):
            raise ValueError("RFC set DL fractions must be strictly increasing")
        if self.default_index < 0:
            balanced = min(range(len(self.members)),
                           key=lambda i: abs(self.members[i].dl_fraction - 0.5))
            object.__setattr__(self, "default_index", balanced)

    @property
    def default(self) -> RadioFrameConfig:
        return self.members[self.default_index]

    def labels(self) -> tuple[str, ...]:
        return tuple(m.ratio_label for m in self.members)


def make_rfc_set(ratios=DEFAULT_RATIOS, slots_per_frame: int = 20) -> RfcSet:
    members = tuple(build_rfc(r, slots_per_frame) for r in ratios)
    return RfcSet(members=members)


def quantize_theta(theta: float, rfc_set: RfcSet) -> RadioFrameConfig:
    """Pick the set member whose DL fraction is nearest ``theta``.

    Exact ties go to the larger DL fraction.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta {theta} outside [0, 1]")
    best = min(rfc_set.members, key=lambda m: (abs(m.dl_fraction - theta), -m.dl_fraction))
    return best
