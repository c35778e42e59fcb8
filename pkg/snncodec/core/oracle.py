# snncodec/core/oracle.py
"""
Exact firing patterns of a soft-reset LIF neuron driven by a constant input X.

Along any fixed spike history the membrane potential is affine in X,
V = a*X + b, so each step's pre-threshold H = L*V + (1-L)*X is affine too and
crosses v_th at a single X*. Splitting every interval at its crossing
enumerates all patterns with exact rational boundaries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from snncodec.errors import ContractError
from snncodec.models.pattern import FiringPattern, PatternBoundary

logger = logging.getLogger(__name__)

# 2**T branches in the worst case
MAX_TIME_STEPS = 24
BOUNDARY_OFFSET = 1e-9


def _rational(value):
    # str() keeps 0.3 as 3/10 rather than its binary expansion
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


def _check_params(time_steps, decay, v_th):
    if time_steps < 1:
        raise ContractError(f"T must be >= 1, got {time_steps}")
    if not 0 < decay < 1:
        raise ContractError(f"decay must lie in (0, 1), got {decay}")
    if not v_th > 0:
        raise ContractError(f"v_th must be positive, got {v_th}")


def simulate_constant(x, time_steps=4, decay=0.5, v_th=1.0, exact=False):
    """Run the neuron from rest with I[t] = x; `exact` uses rational arithmetic."""
    _check_params(time_steps, decay, v_th)
    if x < 0:
        raise ContractError(f"input must be nonnegative, got {x}")
    if exact:
        x, decay, v_th = Fraction(x), _rational(decay), _rational(v_th)

    v = 0
    bits = []
    for _ in range(time_steps):
        h = decay * v + (1 - decay) * x
        s = 1 if h - v_th >= 0 else 0
        v = h - s * v_th
        bits.append(s)
    return FiringPattern(tuple(bits))


def enumerate_boundaries(time_steps=4, decay=0.5, v_th=1.0):
    """All firing patterns for X in [0, inf) with their half-open intervals, sorted by lo."""
    _check_params(time_steps, decay, v_th)
    if time_steps > MAX_TIME_STEPS:
        raise ContractError(f"enumeration is capped at T <= {MAX_TIME_STEPS}, got {time_steps}")
    L, theta = _rational(decay), _rational(v_th)

    # (lo, hi, slope, intercept, bits); hi None is +inf
    branches = [(Fraction(0), None, Fraction(0), Fraction(0), ())]
    for _ in range(time_steps):
        split = []
        for lo, hi, a, b, bits in branches:
            slope, intercept = L * a + (1 - L), L * b
            crossing = (theta - intercept) / slope
            if crossing > lo:
                upper = crossing if hi is None or crossing < hi else hi
                split.append((lo, upper, slope, intercept, bits + (0,)))
            if hi is None or crossing < hi:
                split.append((max(lo, crossing), hi, slope, intercept - theta, bits + (1,)))
        branches = split

    branches.sort(key=lambda branch: branch[0])
    merged = []
    for lo, hi, _, _, bits in branches:
        if merged and merged[-1].pattern.bits == bits and merged[-1].hi == lo:
            merged[-1] = PatternBoundary(merged[-1].pattern, merged[-1].lo, hi)
        else:
            merged.append(PatternBoundary(FiringPattern(bits), lo, hi))
    logger.debug("enumerated patterns", extra={'T': time_steps, 'decay': str(L), 'count': len(merged)})
    return merged


def pattern_for(boundaries, x):
    for boundary in boundaries:
        if boundary.contains(x):
            return boundary.pattern
    raise ContractError(f"X={x} is not covered by the boundaries")


def is_rate_monotone(boundaries):
    counts = [b.pattern.spike_count for b in boundaries]
    return all(earlier <= later for earlier, later in zip(counts, counts[1:]))


def is_partition(boundaries):
    if not boundaries or boundaries[0].lo != 0 or boundaries[-1].hi is not None:
        return False
    return all(prev.hi == nxt.lo for prev, nxt in zip(boundaries, boundaries[1:]))


@dataclass
class VerificationReport:
    agreements: int = 0
    disagreements: list = field(default_factory=list)  # (X, expected, simulated)

    @property
    def ok(self):
        return not self.disagreements


def verification_samples(boundaries, n_samples, seed, include_exact=True):
    """Uniform samples over [0, hi_max + 1] plus every boundary point +- 1e-9 (and the point itself when float-exact)."""
    finite = [b.lo for b in boundaries if b.lo > 0]
    top = float(max(finite)) if finite else 1.0
    rng = np.random.default_rng(seed)
    samples = list(rng.uniform(0.0, top + 1.0, size=n_samples))
    for point in finite:
        as_float = float(point)
        if include_exact and Fraction(as_float) == point:
            samples.append(as_float)
        samples.extend(v for v in (as_float - BOUNDARY_OFFSET, as_float + BOUNDARY_OFFSET) if v >= 0)
    return samples


def verify_boundaries(time_steps=4, decay=0.5, v_th=1.0, n_samples=10000, seed=0):
    """Cross-check simulate_constant against the enumerated boundaries."""
    if n_samples < 1:
        raise ContractError(f"n_samples must be >= 1, got {n_samples}")
    boundaries = enumerate_boundaries(time_steps, decay, v_th)
    report = VerificationReport()
    # float simulation only tracks the rational recursion exactly when L and v_th are binary-exact
    exact_params = Fraction(float(decay)) == _rational(decay) and Fraction(float(v_th)) == _rational(v_th)
    for x in verification_samples(boundaries, n_samples, seed, include_exact=exact_params):
        expected = pattern_for(boundaries, x)
        simulated = simulate_constant(x, time_steps, decay, v_th)
        if simulated == expected:
            report.agreements += 1
        else:
            report.disagreements.append((x, expected, simulated))
    if report.disagreements:
        logger.warning("oracle disagreements", extra={'count': len(report.disagreements)})
    return report


# ---------------------------------------
# Rendering
# ---------------------------------------

def boundaries_to_csv(boundaries):
    lines = ["pattern,lo,hi"]
    lines += [f"{b.pattern},{b.lo_display},{b.hi_display}" for b in boundaries]
    return "\n".join(lines) + "\n"


def boundaries_to_table(boundaries):
    """Aligned two-column table: firing pattern and its input range."""
    ranges = []
    for b in boundaries:
        if b.lo == 0 and b.hi is not None:
            ranges.append(f"X < {b.hi_display}")
        elif b.hi is None:
            ranges.append(f"{b.lo_display} <= X")
        else:
            ranges.append(f"{b.lo_display} <= X < {b.hi_display}")
    head = ("Firing Pattern", "Boundary Range")
    width = max(len(head[0]), *(len(str(b.pattern)) for b in boundaries))
    range_width = max(len(head[1]), *(len(r) for r in ranges))
    lines = [f"{head[0]:<{width}}  {head[1]}", f"{'-' * width}  {'-' * range_width}"]
    lines += [f"{str(b.pattern):<{width}}  {r}" for b, r in zip(boundaries, ranges)]
    return "\n".join(lines) + "\n"
