"""LLR update rules and path metric increments for successive cancellation."""

import numpy as np

# Saturation for the exact box-plus and exact metric; exp(30) already dwarfs
# any penalty a realistic frame can accumulate.
LLR_CLIP = 30.0


def hard_decision(llr):
    """0 for llr >= 0, else 1."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def f_exact(a, b, clip: float = LLR_CLIP):
    """Box-plus combine of two LLRs, log-domain form, saturated at +-clip."""
    a = np.clip(np.asarray(a, dtype=np.float64), -clip, clip)
    b = np.clip(np.asarray(b, dtype=np.float64), -clip, clip)
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    mag_lo = np.minimum(np.abs(a), np.abs(b))
    mag_hi = np.maximum(np.abs(a), np.abs(b))
    mag = mag_lo + np.log1p(np.exp(-(mag_hi + mag_lo))) - np.log1p(
        np.exp(-(mag_hi - mag_lo))
    )
    return np.clip(sign * mag, -clip, clip)


def f_minsum(a, b):
    """Min-sum approximation of the box-plus: sign(a*b) * min(|a|, |b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    return sign * np.minimum(np.abs(a), np.abs(b))


def g_func(a, b, bit):
    """LLR for the lower branch once the upper-branch bit is known."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.where(np.asarray(bit) != 0, -a, a) + b


def combine_bits(beta_left, beta_right):
    """Parent output: first half is the XOR, second half the right child."""
    beta_left = np.asarray(beta_left, dtype=np.uint8)
    beta_right = np.asarray(beta_right, dtype=np.uint8)
    if beta_left.shape != beta_right.shape:
        raise ValueError("child outputs must have equal shape")
    return np.concatenate([beta_left ^ beta_right, beta_right], axis=-1)


def metric_increment(bit, llr, mode: str):
    """Path penalty for deciding ``bit`` against decision LLR ``llr``.

    "approx" charges |llr| when the decision contradicts the hard decision
    and nothing otherwise; "exact" charges log(1 + exp(-(1-2*bit)*llr)).
    """
    llr = np.asarray(llr, dtype=np.float64)
    bit = np.asarray(bit)
    if mode == "approx":
        return np.where(bit != hard_decision(llr), np.abs(llr), 0.0)
    if mode == "exact":
        signed = np.where(bit != 0, llr, -llr)
        return np.logaddexp(0.0, np.clip(signed, -LLR_CLIP, LLR_CLIP))
    raise ValueError(f"unknown metric mode {mode!r}")
