"""Traffic-ratio coordination and common frame selection.

Each cell tracks the DL share of its buffered traffic, averages it per frame
and shares the average with its neighbours.  The cluster then sorts cells by
how far their reported share sits from the balance point (0.5), weights the
sorted values with a monotone-descending Kaiser window so the most imbalanced
cells dominate, and quantizes the weighted mean onto the candidate RFC set.
Static and per-cell dynamic selection policies are provided as baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import i0e

from .frame import RadioFrameConfig, RfcSet, quantize_theta

#: Reported value for a cell with no buffered traffic in a frame.
NO_TRAFFIC = None

#: Balance point of the DL traffic share.
BALANCE_POINT = 0.5


@dataclass(frozen=True)
class RatioReport:
    """One cell's frame-averaged DL traffic share, as carried over Xn."""

    cell: int
    mu_bar: float | None          # None = no traffic observed this frame
    frame: int
    delivery_time_ms: float = 0.0

    def __post_init__(self):
        if self.mu_bar is not None and not 0.0 <= self.mu_bar <= 1.0:
            raise ValueError(f"mu_bar {self.mu_bar} outside [0, 1]")


def traffic_ratio(z_dl: float, z_ul: float) -> float | None:
    """DL share of buffered bits; ``NO_TRAFFIC`` when both buffers are empty."""
    if z_dl < 0 or z_ul < 0:
        raise ValueError("buffered sizes must be non-negative")
    total = z_dl + z_ul
    if total == 0:
        return NO_TRAFFIC
    return z_dl / total


def frame_average(samples) -> float | None:
    """Mean of the per-slot ratios, ignoring no-traffic slots.

    Returns ``NO_TRAFFIC`` when every slot of the frame was empty.
    """
    present = [s for s in samples if s is not None]
    if not present:
        return NO_TRAFFIC
    return math.fsum(present) / len(present)


def kaiser_weights(length_minus_one: int, beta: float, mirrored: bool = True) -> np.ndarray:
    """Kaiser window weights w[0..L] with w[0] = 1.

    The default mirrored form is the monotone-descending half window

        w[l] = I0(beta * sqrt(1 - (l/L)^2)) / I0(beta),

    which gives the strict ordering w[0] > w[1] > ... > w[L] needed when the
    weights are applied to a ranked data set.  ``mirrored=False`` yields the
    textbook symmetric window peaking at L/2 (kept for comparison).  beta = 0
    degenerates to all-ones in both forms.
    """
    L = length_minus_one
    if L < 0:
        raise ValueError("window length must be >= 1")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if L == 0:
        return np.ones(1)
    l = np.arange(L + 1, dtype=float)
    if mirrored:
        x = 1.0 - (l / L) ** 2
    else:
        x = 1.0 - (2.0 * l / L - 1.0) ** 2
    arg = beta * np.sqrt(np.clip(x, 0.0, None))
    # I0(arg)/I0(beta) via the exponentially scaled Bessel function; stable
    # for large beta where I0 itself overflows.
    return i0e(arg) * np.exp(arg - beta) / i0e(beta)


@dataclass(frozen=True)
class KaiserWindow:
    """A materialized window: length, shaping factor and weights."""

    length_minus_one: int
    beta: float
    weights: np.ndarray

    @classmethod
    def make(cls, length_minus_one: int, beta: float, mirrored: bool = True) -> "KaiserWindow":
        return cls(length_minus_one, beta,
                   kaiser_weights(length_minus_one, beta, mirrored=mirrored))


def sort_reports(mu_bars, balance: float = BALANCE_POINT) -> tuple[np.ndarray, np.ndarray]:
    """Order cells by descending distance of their share from ``balance``.

    ``mu_bars`` is one value per cell, ``NO_TRAFFIC`` entries allowed; those
    are replaced by the balance point itself (distance zero, so idle cells
    sort last and cannot steer the cluster).  Ties break on ascending cell
    id.  Returns (ordered values, ordered cell ids).
    """
    values = np.array([balance if m is None else float(m) for m in mu_bars])
    dist = np.abs(values - balance)
    order = sorted(range(len(values)), key=lambda c: (-dist[c], c))
    order = np.array(order, dtype=int)
    return values[order], order


def filter_theta(psi: np.ndarray, weights: np.ndarray) -> float:
    """Weighted mean of the ranked shares: the cluster-level DL share."""
    psi = np.asarray(psi, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if psi.shape != weights.shape:
        raise ValueError(f"{psi.size} ranked values vs {weights.size} weights")
    return float(np.dot(psi, weights) / np.sum(weights))


@dataclass(frozen=True)
class Proposed:
    """Cluster-common RFC from Kaiser-filtered ranked traffic shares."""

    beta_hat: float = 0.9
    beta_max: float = 100.0
    balance: float = BALANCE_POINT
    use_empirical_mean: bool = False  # replace the fixed balance point by the report mean
    mirrored: bool = True

    @property
    def beta(self) -> float:
        return self.beta_hat * self.beta_max


@dataclass(frozen=True)
class StaticTdd:
    """One RFC fixed for the whole run, offset from the offered DL share.

    ``alpha`` shifts the offered-load DL share by ``alpha * 0.5`` toward
    ``bias`` ('dl' or 'ul') before quantization; alpha = 0 matches the
    offered load exactly.
    """

    alpha: float = 0.0
    bias: str = "dl"
    offered_dl_share: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.bias not in ("dl", "ul"):
            raise ValueError("bias must be 'dl' or 'ul'")

    @property
    def target_share(self) -> float:
        shift = 0.5 * self.alpha
        share = self.offered_dl_share + (shift if self.bias == "dl" else -shift)
        return min(1.0, max(0.0, share))


@dataclass(frozen=True)
class DynamicTdd:
    """Every cell independently quantizes its own share each period."""

    cli_free: bool = False


TddPolicy = Proposed | StaticTdd | DynamicTdd


@dataclass
class Decision:
    """Outcome of one RFC update: per-cell RFCs plus diagnostics."""

    rfc_by_cell: list[RadioFrameConfig]
    theta: float | None = None
    psi: np.ndarray | None = None
    common: bool = True


def compute_theta(mu_bars, policy: Proposed) -> float | None:
    """Run the ranked-and-filtered share pipeline; None for an idle cluster."""
    if all(m is None for m in mu_bars):
        return None
    if policy.use_empirical_mean:
        present = [m for m in mu_bars if m is not None]
        balance = math.fsum(present) / len(present)
    else:
        balance = policy.balance
    psi, _ = sort_reports(mu_bars, balance=balance)
    w = kaiser_weights(len(psi) - 1, policy.beta, mirrored=policy.mirrored)
    return filter_theta(psi, w)


def decide_common_rfc(reports: list[RatioReport], policy: TddPolicy,
                      rfc_set: RfcSet) -> Decision:
    """Select the next-period RFC per cell under the given policy.

    ``reports`` holds exactly one report per cell, ordered by cell id.
    """
    cells = [r.cell for r in reports]
    if cells != sorted(set(cells)):
        raise ValueError("expected exactly one report per cell, ordered by id")
    mu_bars = [r.mu_bar for r in reports]

    if isinstance(policy, Proposed):
        theta = compute_theta(mu_bars, policy)
        if theta is None:
            rfc = rfc_set.default
            return Decision([rfc] * len(cells), theta=None, common=True)
        rfc = quantize_theta(theta, rfc_set)
        return Decision([rfc] * len(cells), theta=theta, common=True)

    if isinstance(policy, StaticTdd):
        rfc = quantize_theta(policy.target_share, rfc_set)
        return Decision([rfc] * len(cells), theta=policy.target_share, common=True)

    if isinstance(policy, DynamicTdd):
        per_cell = [rfc_set.default if m is None else quantize_theta(m, rfc_set)
                    for m in mu_bars]
        labels = {r.ratio_label for r in per_cell}
        return Decision(per_cell, theta=None, common=len(labels) == 1)

    raise TypeError(f"unknown policy {policy!r}")
