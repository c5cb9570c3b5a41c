"""Per-TTI link abstraction.

Channels are block-constant over one 4-symbol TTI and i.i.d. across TTIs:
each matrix entry is unit-variance complex Gaussian scaled by the pair's
large-scale amplitude.  Transmitters use single-stream precoding along the
dominant right singular vector of their serving channel; receivers apply an
MMSE interference-rejection combiner built from the exact interference-plus-
noise covariance.  The post-combining SINR carries an explicit breakdown of
same-direction versus cross-direction interference, is compressed across the
resources of a transport block by exponential effective-SINR mapping, and
drives a threshold decode model with Chase-combined SINR accumulation across
HARQ attempts.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

ALIGNED = "aligned"
FLEXIBLE = "flexible"

_EYE_CACHE: dict = {}


def _eye(dim: int) -> np.ndarray:
    m = _EYE_CACHE.get(dim)
    if m is None:
        m = np.eye(dim)
        _EYE_CACHE[dim] = m
    return m


class DegenerateChannelError(ValueError):
    """All-zero serving channel cannot be precoded."""


# -- modulation and coding ----------------------------------------------------

_MCS_SE = (0.25, 0.4, 0.6, 0.9, 1.2, 1.6, 2.0, 2.6, 3.2, 3.9, 4.5, 5.2, 5.9, 6.6, 7.2)
_MCS_NAMES = (
    "QPSK-1/8", "QPSK-1/5", "QPSK-0.30", "QPSK-0.45", "QPSK-0.60",
    "16QAM-0.40", "16QAM-0.50", "16QAM-0.65", "16QAM-0.80",
    "64QAM-0.65", "64QAM-0.75", "64QAM-0.87",
    "256QAM-0.74", "256QAM-0.83", "256QAM-0.90",
)


@dataclass(frozen=True)
class McsTable:
    """Spectral efficiencies, decode thresholds and per-PRB TTI payloads."""

    se: np.ndarray
    threshold_db: np.ndarray
    bits_per_prb: np.ndarray
    names: tuple
    _threshold_list: tuple = ()

    def __len__(self) -> int:
        return len(self.se)


def make_mcs_table(shannon_gap_db: float = 2.0, data_re_per_prb: int = 48) -> McsTable:
    se = np.array(_MCS_SE)
    threshold = 10.0 * np.log10(2.0 ** se - 1.0) + shannon_gap_db
    bits = np.maximum(1, np.floor(data_re_per_prb * se)).astype(np.int64)
    return McsTable(se=se, threshold_db=threshold, bits_per_prb=bits, names=_MCS_NAMES,
                    _threshold_list=tuple(threshold.tolist()))


def select_mcs(table: McsTable, sinr_db: float) -> int:
    """Highest entry whose threshold the SINR clears; lowest entry as floor."""
    idx = bisect_right(table._threshold_list, sinr_db) - 1
    return max(0, idx)


# -- channel generation --------------------------------------------------------

@dataclass(frozen=True)
class LinkRealization:
    """Fast-fading matrices of one interfering pair for one TTI."""

    h_dl: np.ndarray | None = None   # BS -> UE, (ue_ant, bs_ant)
    h_ul: np.ndarray | None = None   # UE -> BS, (bs_ant, ue_ant)
    g: np.ndarray | None = None      # UE -> UE, (ue_ant, ue_ant)
    q: np.ndarray | None = None      # BS -> BS, (bs_ant, bs_ant)


def draw_channel(rx_ant: int, tx_ant: int, amplitude: float,
                 rng: np.random.Generator) -> np.ndarray:
    """One fading matrix: unit-variance entries times the large-scale amplitude."""
    z = rng.standard_normal((rx_ant, 2 * tx_ant)).view(np.complex128)
    z *= amplitude * 0.7071067811865476
    return z


def draw_channels(gain_db, links, bs_ant: int, ue_ant: int,
                  rng: np.random.Generator) -> dict:
    """Draw fading for ``links`` = [(tx_node, rx_node, tx_is_bs, rx_is_bs)].

    Returns {(tx_node, rx_node): matrix} with matrices shaped (rx antennas,
    tx antennas) and scaled by the pair's amplitude gain from ``gain_db``.
    Draw order follows the list, so a fixed link list and generator state
    reproduce identical realizations.
    """
    out = {}
    for tx, rx, tx_is_bs, rx_is_bs in links:
        amp = 10.0 ** (gain_db[tx, rx] / 20.0)
        shape_rx = bs_ant if rx_is_bs else ue_ant
        shape_tx = bs_ant if tx_is_bs else ue_ant
        out[(tx, rx)] = draw_channel(shape_rx, shape_tx, amp, rng)
    return out


# -- precoding ----------------------------------------------------------------

def _leading_eigvec_2x2(m: np.ndarray) -> np.ndarray:
    """Leading eigenvector of a 2x2 Hermitian PSD matrix, closed form."""
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    if abs(b) < 1e-300:
        return np.array([1.0 + 0j, 0.0]) if a >= d else np.array([0.0, 1.0 + 0j])
    half_tr = 0.5 * (a + d)
    lam = half_tr + math.sqrt(max(0.0, half_tr ** 2 - (a * d - abs(b) ** 2)))
    b = complex(b)
    c1 = lam - a
    scale = 1.0 / math.sqrt(abs(b) ** 2 + c1 * c1)
    return np.array([b * scale, c1 * scale])


def precode(h: np.ndarray) -> np.ndarray:
    """Unit-norm single-stream precoder: dominant right singular vector of h."""
    if not np.any(h):
        raise DegenerateChannelError("cannot precode an all-zero channel")
    rx, tx = h.shape
    if min(rx, tx) == 2:
        if rx <= tx:
            u = _leading_eigvec_2x2(h @ h.conj().T)
            v = h.conj().T @ u
        else:
            v = _leading_eigvec_2x2(h.conj().T @ h)
        return v / math.sqrt(np.vdot(v, v).real)
    gram = h.conj().T @ h
    _, vecs = np.linalg.eigh(gram)
    v = vecs[:, -1]
    return v / math.sqrt(np.vdot(v, v).real)


# -- combining and SINR ---------------------------------------------------------

@dataclass
class ReceiverOutput:
    gamma: float
    combiner: np.ndarray
    same_link_power: float
    cross_link_power: float
    noise_power: float
    regularized: bool = False


def mmse_sinr(h_eff: np.ndarray, same_cols: np.ndarray | None,
              cross_cols: np.ndarray | None, noise_power: float) -> ReceiverOutput:
    """Post-combining SINR for an effective serving vector and interferer columns.

    ``same_cols`` / ``cross_cols`` are (rx_ant, k) matrices whose columns are
    the interferers' effective receive vectors (channel times precoder times
    amplitude and transmit power).  The combiner whitens the exact
    interference-plus-noise covariance; with zero noise and a singular
    covariance, a diagonal loading of 1e-12 of the trace is applied and
    flagged.
    """
    dim = h_eff.shape[0]
    has_same = same_cols is not None and same_cols.shape[1] > 0
    has_cross = cross_cols is not None and cross_cols.shape[1] > 0
    if has_same and has_cross:
        a_all = np.concatenate((same_cols, cross_cols), axis=1)
    elif has_same:
        a_all = same_cols
    elif has_cross:
        a_all = cross_cols
    else:
        a_all = None
    k = 0 if a_all is None else a_all.shape[1]

    regularized = False
    sigma = noise_power
    if sigma == 0.0:
        trace = float(np.sum(np.abs(a_all) ** 2)) if k else 0.0
        sigma = 1e-12 * trace if trace > 0 else 1e-30
        regularized = True

    # the combiner is defined up to scale; each branch picks the cheapest form
    if k == 0:
        u = h_eff
    elif dim == 2:
        r = a_all @ a_all.conj().T
        r00 = complex(r[0, 0]) + sigma
        r11 = complex(r[1, 1]) + sigma
        r01 = complex(r[0, 1])
        r10 = complex(r[1, 0])
        det = r00 * r11 - r01 * r10
        h0, h1 = complex(h_eff[0]), complex(h_eff[1])
        u = np.array([(r11 * h0 - r01 * h1) / det, (r00 * h1 - r10 * h0) / det])
    elif k == 1:
        a = a_all[:, 0]
        u = h_eff - a * (np.vdot(a, h_eff) / (sigma + np.vdot(a, a).real))
    else:
        r = a_all @ a_all.conj().T + sigma * _eye(dim)
        u = np.linalg.solve(r, h_eff)
    signal = abs(np.vdot(u, h_eff)) ** 2
    same_p = 0.0
    cross_p = 0.0
    if has_same:
        same_p = float(np.sum(np.abs(u.conj() @ same_cols) ** 2))
    if has_cross:
        cross_p = float(np.sum(np.abs(u.conj() @ cross_cols) ** 2))
    denom = same_p + cross_p + noise_power * float(np.vdot(u, u).real)
    if denom == 0.0:
        denom = sigma * float(np.vdot(u, u).real)
    if denom == 0.0:
        gamma = math.inf
    else:
        gamma = signal / denom
    return ReceiverOutput(gamma=float(gamma), combiner=u, same_link_power=same_p,
                          cross_link_power=cross_p, noise_power=noise_power,
                          regularized=regularized)


def post_sinr(h_serv: np.ndarray, x_serv: np.ndarray, p_serv: float,
              same_link: list, cross_link: list, mode: str,
              noise_power: float) -> ReceiverOutput:
    """SINR of one link given interferer (channel, precoder, power) triples.

    ``mode`` is 'aligned' (cluster-wide common direction; cross-direction
    interferer set must be empty) or 'flexible' (cross-direction interferers
    allowed).  Transmit powers are linear; set ``noise_power`` to zero for
    the pure signal-to-interference form.
    """
    if mode not in (ALIGNED, FLEXIBLE):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == ALIGNED and cross_link:
        raise ValueError("aligned mode cannot carry cross-direction interferers")
    h_eff = math.sqrt(p_serv) * (h_serv @ x_serv)

    def columns(triples):
        if not triples:
            return None
        cols = np.empty((h_eff.shape[0], len(triples)), dtype=complex)
        for k, (h_i, x_i, p_i) in enumerate(triples):
            cols[:, k] = math.sqrt(p_i) * (h_i @ x_i)
        return cols

    return mmse_sinr(h_eff, columns(same_link), columns(cross_link), noise_power)


def effective_sinr(gammas, beta: float, weights=None) -> float:
    """Exponential effective-SINR mapping over a transport block's resources.

    Computed relative to the smallest SINR so that large values cannot
    underflow the exponential; equal inputs map to themselves exactly.
    """
    g = np.asarray(gammas, dtype=float)
    if g.size == 0:
        raise ValueError("effective SINR of an empty resource set")
    if beta <= 0:
        raise ValueError("EESM beta must be > 0")
    g_min = float(np.min(g))
    if not math.isfinite(g_min):
        return g_min
    e = np.exp(-(g - g_min) / beta)
    if weights is None:
        mean = float(np.mean(e))
    else:
        w = np.asarray(weights, dtype=float)
        mean = float(np.dot(w, e) / np.sum(w))
    return g_min - beta * math.log(mean)


def decode(gamma_eff: float, threshold_db: float, gamma_sum: float,
           rng: np.random.Generator, margin_std_db: float = 1.0) -> tuple[bool, float]:
    """Chase-combined decode attempt.

    The new effective SINR adds linearly to the accumulated SINR of earlier
    attempts; the block decodes when the accumulated SINR in dB clears the
    MCS threshold plus a zero-mean Gaussian decoding margin.
    """
    gamma_sum = gamma_sum + gamma_eff
    margin = rng.normal(0.0, margin_std_db) if margin_std_db > 0 else 0.0
    success = 10.0 * math.log10(gamma_sum) >= threshold_db + margin
    return success, gamma_sum
