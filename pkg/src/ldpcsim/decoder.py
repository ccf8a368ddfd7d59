"""Reduced min-sum decoding.

The reduced formulation keeps one total LLR per variable node and one
message per edge (check -> variable).  The variable-to-check message of
classic min-sum is never stored: it is recovered per edge as the
difference d = total - check_msg.  One iteration is:

    1. every check node c: for each neighbor v,
       new_msg(c->v) = prod(sign(d')) * min(|d'|) over the other neighbors
    2. every variable node v: total = prior + sum of incoming messages
    3. hard decision (total >= 0 -> bit 0) and syndrome check

`decode` runs a flooding schedule with this state layout; the classic
min-sum decoder with explicit variable-to-check messages is kept as
`decode_minsum_reference`, an independent cross-check.

Arithmetic is float64 with a configurable saturating clamp, or a
saturating Q-format fixed-point grid for platforms without an FPU.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .code import ParityCheckMatrix, syndrome_ok
from .errors import ConfigurationError, LengthMismatch


@dataclass(frozen=True)
class QFormat:
    """Signed fixed-point grid with total_bits, frac_bits fractional.

    Values live on multiples of 2^-frac_bits and saturate symmetrically at
    +-(2^(total_bits-1) - 1) / 2^frac_bits.  Rounding is ties-to-even.
    """

    total_bits: int = 8
    frac_bits: int = 4

    def __post_init__(self):
        if not 0 <= self.frac_bits < self.total_bits:
            raise ConfigurationError(
                f"need 0 <= frac_bits < total_bits, got Q{self.total_bits}.{self.frac_bits}"
            )

    @property
    def max_value(self) -> float:
        return (2 ** (self.total_bits - 1) - 1) / 2**self.frac_bits

    def quantize(self, x: np.ndarray) -> np.ndarray:
        scale = float(2**self.frac_bits)
        return np.clip(np.round(x * scale), -(2 ** (self.total_bits - 1) - 1),
                       2 ** (self.total_bits - 1) - 1) / scale


Arithmetic = Union[str, QFormat]


@dataclass(frozen=True)
class DecoderConfig:
    max_iter: int = 30
    early_exit: bool = True
    clamp: float | None = 64.0
    arithmetic: Arithmetic = "float64"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if isinstance(self.arithmetic, str) and self.arithmetic != "float64":
            raise ConfigurationError(f"unknown arithmetic {self.arithmetic!r}")

    @property
    def effective_clamp(self) -> float | None:
        if isinstance(self.arithmetic, QFormat):
            return self.arithmetic.max_value
        return self.clamp

    def saturate(self, x: np.ndarray) -> np.ndarray:
        """Clamp (and, in fixed-point mode, grid-quantize) an array."""
        if isinstance(self.arithmetic, QFormat):
            return self.arithmetic.quantize(x)
        if self.clamp is None:
            return x
        return np.clip(x, -self.clamp, self.clamp)


@dataclass
class DecoderState:
    """Per-variable totals plus per-edge check-to-variable messages."""

    total: np.ndarray
    check_msg: np.ndarray
    prior: np.ndarray
    iteration: int = 0


@dataclass
class DecodeResult:
    bits: np.ndarray
    converged: bool
    iterations_used: int
    final_state: DecoderState | None = None
    message_trace: list = field(default_factory=list)


def _validate(H: ParityCheckMatrix, prior: np.ndarray) -> np.ndarray:
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (H.n,):
        raise LengthMismatch(f"prior length {prior.shape} != n={H.n}")
    if not np.isfinite(prior).all():
        raise ValueError("priors must be finite")
    min_deg = int(H.row_degrees().min())
    if min_deg < 2:
        raise ConfigurationError(
            f"decoder requires every check degree >= 2, found degree {min_deg}"
        )
    return prior


def init_state(H: ParityCheckMatrix, prior: np.ndarray, cfg: DecoderConfig) -> DecoderState:
    """Totals start at the (saturated) priors; all check messages at zero."""
    prior = cfg.saturate(_validate(H, prior))
    return DecoderState(
        total=prior.copy(),
        check_msg=np.zeros(H.edges, dtype=np.float64),
        prior=prior,
        iteration=0,
    )


def check_node_update(
    state: DecoderState, c: int, H: ParityCheckMatrix, cfg: DecoderConfig
) -> np.ndarray:
    """Recompute the outgoing messages of one check node (two-minimum scan).

    Tracks the smallest and second-smallest |d| plus the running sign
    product in one pass; sign(0) counts as +1.  Updates state in place and
    returns the new messages in adjacency order.
    """
    lo, hi = int(H.row_ptr[c]), int(H.row_ptr[c + 1])
    min1 = np.inf
    min2 = np.inf
    argmin = -1
    sign_all = 1.0
    d = []
    for i, e in enumerate(range(lo, hi)):
        dv = state.total[H.edge_var[e]] - state.check_msg[e]
        d.append(dv)
        s = -1.0 if dv < 0 else 1.0
        sign_all *= s
        a = abs(dv)
        if a < min1:
            min2 = min1
            min1 = a
            argmin = i
        elif a < min2:
            min2 = a
    out = np.empty(hi - lo, dtype=np.float64)
    for i in range(hi - lo):
        s = -1.0 if d[i] < 0 else 1.0
        mag = min2 if i == argmin else min1
        out[i] = sign_all * s * mag
    out = cfg.saturate(out)
    state.check_msg[lo:hi] = out
    return out


def check_node_update_bruteforce(
    state: DecoderState, c: int, H: ParityCheckMatrix, cfg: DecoderConfig
) -> np.ndarray:
    """Literal product/min over each exclusion set; O(deg^2) oracle."""
    lo, hi = int(H.row_ptr[c]), int(H.row_ptr[c + 1])
    d = [state.total[H.edge_var[e]] - state.check_msg[e] for e in range(lo, hi)]
    out = np.empty(hi - lo, dtype=np.float64)
    for i in range(len(d)):
        sign = 1.0
        mag = np.inf
        for j, dv in enumerate(d):
            if j == i:
                continue
            sign *= -1.0 if dv < 0 else 1.0
            mag = min(mag, abs(dv))
        out[i] = sign * mag
    return cfg.saturate(out)


def _block_check_messages(d: np.ndarray, starts: np.ndarray, degs: np.ndarray) -> np.ndarray:
    """Vectorized two-minimum update over contiguous rows.

    d holds the per-edge differences for the block, starts/degs index its
    rows (starts[0] == 0).  Pure selection arithmetic: results match the
    scalar scan bit for bit.
    """
    abs_d = np.abs(d)
    sgn = np.where(d < 0.0, -1.0, 1.0)
    min1 = np.minimum.reduceat(abs_d, starts)
    pos = np.arange(len(d)) - np.repeat(starts, degs)
    cand = np.where(abs_d == np.repeat(min1, degs), pos, len(d))
    first_min = np.minimum.reduceat(cand, starts)
    amin = starts + first_min
    shadowed = abs_d.copy()
    shadowed[amin] = np.inf
    min2 = np.minimum.reduceat(shadowed, starts)
    sign_row = np.multiply.reduceat(sgn, starts)
    mag = np.repeat(min1, degs)
    mag[amin] = min2
    return np.repeat(sign_row, degs) * sgn * mag


def check_node_update_block(
    state: DecoderState,
    H: ParityCheckMatrix,
    cfg: DecoderConfig,
    c_lo: int = 0,
    c_hi: int | None = None,
) -> None:
    """Update all check nodes in [c_lo, c_hi) from the previous totals."""
    if c_hi is None:
        c_hi = H.m
    e_lo, e_hi = int(H.row_ptr[c_lo]), int(H.row_ptr[c_hi])
    d = state.total[H.edge_var[e_lo:e_hi]] - state.check_msg[e_lo:e_hi]
    starts = (H.row_ptr[c_lo:c_hi] - e_lo).astype(np.int64)
    degs = np.diff(H.row_ptr[c_lo : c_hi + 1])
    state.check_msg[e_lo:e_hi] = cfg.saturate(
        _block_check_messages(d, starts, degs)
    )


def variable_node_update(
    state: DecoderState, H: ParityCheckMatrix, cfg: DecoderConfig
) -> None:
    """total_v = prior_v + sum of incoming check messages, saturated."""
    incoming = np.bincount(H.edge_var, weights=state.check_msg, minlength=H.n)
    state.total = cfg.saturate(state.prior + incoming)


def hard_decision(state: DecoderState) -> np.ndarray:
    """total >= 0 decides bit 0; negative totals decide bit 1."""
    return (state.total < 0.0).astype(np.uint8)


def decode(
    H: ParityCheckMatrix,
    prior: np.ndarray,
    cfg: DecoderConfig | None = None,
    record_messages: bool = False,
    keep_state: bool = False,
) -> DecodeResult:
    """Flooding-schedule decode: all check nodes, all variables, decision.

    Stops at the first valid syndrome when early_exit is set, else after
    max_iter iterations.  Deterministic for identical inputs.
    """
    cfg = cfg or DecoderConfig()
    state = init_state(H, prior, cfg)
    trace: list = []
    bits = hard_decision(state)
    converged = False
    iterations = 0
    for j in range(1, cfg.max_iter + 1):
        check_node_update_block(state, H, cfg)
        if record_messages:
            trace.append(state.check_msg.copy())
        variable_node_update(state, H, cfg)
        state.iteration = j
        iterations = j
        bits = hard_decision(state)
        converged = syndrome_ok(H, bits)
        if cfg.early_exit and converged:
            break
    return DecodeResult(
        bits=bits,
        converged=converged,
        iterations_used=iterations,
        final_state=state if keep_state else None,
        message_trace=trace,
    )


def decode_minsum_reference(
    H: ParityCheckMatrix,
    prior: np.ndarray,
    cfg: DecoderConfig | None = None,
    record_messages: bool = False,
) -> DecodeResult:
    """Classic min-sum with explicit variable-to-check messages.

    Same schedule and stopping rule as `decode`, but the per-edge
    variable-to-check message q is stored rather than recovered as a
    difference.  Plain loops throughout; used as an oracle, so it shares
    no kernel code with the reduced path.  Message equivalence holds when
    clamping is off.
    """
    cfg = cfg or DecoderConfig()
    prior = cfg.saturate(_validate(H, prior)).copy()
    E = H.edges
    q = prior[H.edge_var].copy()
    r = np.zeros(E, dtype=np.float64)
    trace: list = []
    bits = (prior < 0).astype(np.uint8)
    converged = False
    iterations = 0
    for it in range(1, cfg.max_iter + 1):
        for c in range(H.m):
            lo, hi = int(H.row_ptr[c]), int(H.row_ptr[c + 1])
            for i in range(lo, hi):
                sign = 1.0
                mag = np.inf
                for j in range(lo, hi):
                    if j == i:
                        continue
                    sign *= -1.0 if q[j] < 0 else 1.0
                    mag = min(mag, abs(q[j]))
                r[i] = sign * mag
        r = cfg.saturate(r)
        if record_messages:
            trace.append(r.copy())
        totals = cfg.saturate(prior + np.bincount(H.edge_var, weights=r, minlength=H.n))
        for v in range(H.n):
            lo, hi = int(H.col_ptr[v]), int(H.col_ptr[v + 1])
            for i in range(lo, hi):
                e = int(H.col_edge[i])
                acc = 0.0
                for j in range(lo, hi):
                    if j == i:
                        continue
                    acc += r[int(H.col_edge[j])]
                q[e] = prior[v] + acc
        iterations = it
        bits = (totals < 0).astype(np.uint8)
        converged = syndrome_ok(H, bits)
        if cfg.early_exit and converged:
            break
    return DecodeResult(
        bits=bits, converged=converged, iterations_used=iterations,
        message_trace=trace,
    )


def worst_case_config(cfg: DecoderConfig) -> DecoderConfig:
    """Same arithmetic, but always run the full iteration budget."""
    return replace(cfg, early_exit=False)
