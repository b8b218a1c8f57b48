"""Centralized baselines: exact greedy, slack-tolerant greedy, brute force.

The perturbed variant deliberately randomizes among all elements whose
gain is within tau of the best, rather than always taking the best;
always taking the maximum would make its additive guarantee trivially
tight and the associated tests vacuous.
"""

import math
from itertools import combinations

import numpy as np

from .errors import CapExceededError

OPTIMUM_CAP = 10 ** 6


class GreedyResult:
    """Selection order with the per-step values, gains and best gains."""

    def __init__(self, selected, values, gains, best_gains):
        self.selected = selected      # elements in pick order
        self.values = values          # f after each pick, nondecreasing
        self.gains = gains            # realized increment per pick
        self.best_gains = best_gains  # maximal available increment per pick

    @property
    def value(self):
        return self.values[-1] if self.values else 0.0

    def __repr__(self):
        return f"GreedyResult(selected={self.selected}, value={self.value:.6g})"


def _step_gains(f, selected_mask, m):
    gains = []
    base = f.value_mask(selected_mask)
    for v in range(1, m + 1):
        bit = 1 << (v - 1)
        if selected_mask & bit:
            continue
        gains.append((v, f.value_mask(selected_mask | bit) - base))
    return gains


def centralized_greedy(f, K):
    """Plain greedy: best marginal gain each step, ties to the lowest index."""
    m = f.ground.size
    K = min(K, m)
    mask = 0
    selected, values, gains, best_gains = [], [], [], []
    for _ in range(K):
        step = _step_gains(f, mask, m)
        best_v, best_g = step[0]
        for v, g in step[1:]:
            if g > best_g:
                best_v, best_g = v, g
        selected.append(best_v)
        gains.append(best_g)
        best_gains.append(best_g)
        mask |= 1 << (best_v - 1)
        values.append(f.value_mask(mask))
    return GreedyResult(tuple(selected), tuple(values), tuple(gains),
                        tuple(best_gains))


def perturbed_greedy(f, K, taus, seed=0):
    """Greedy with a per-step slack tau_j.

    At step j an element is drawn uniformly among those whose gain is at
    least the best gain minus tau_j, so the realized gain is certified
    to be within tau_j of optimal. tau_j >= 0 keeps the eligible set
    nonempty (the argmax always qualifies).
    """
    m = f.ground.size
    if K > m:
        raise ValueError(f"budget {K} exceeds the {m} available elements")
    if len(taus) != K:
        raise ValueError(f"need {K} slack values, got {len(taus)}")
    if any(t < 0 for t in taus):
        raise ValueError("slack values must be nonnegative")
    rng = np.random.default_rng(seed)
    mask = 0
    selected, values, gains, best_gains = [], [], [], []
    for tau in taus:
        step = _step_gains(f, mask, m)
        best_g = max(g for _, g in step)
        eligible = [(v, g) for v, g in step if g >= best_g - tau]
        v, g = eligible[int(rng.integers(len(eligible)))]
        selected.append(v)
        gains.append(g)
        best_gains.append(best_g)
        mask |= 1 << (v - 1)
        values.append(f.value_mask(mask))
    return GreedyResult(tuple(selected), tuple(values), tuple(gains),
                        tuple(best_gains))


def brute_force_optimum(f, K):
    """Exact maximizer over all subsets of size at most K.

    For a monotone function the maximum is attained at full size, so
    only size-K subsets are enumerated, in lexicographic order; ties
    keep the first (lexicographically smallest) maximizer.
    """
    m = f.ground.size
    K = min(K, m)
    count = math.comb(m, K)
    if count > OPTIMUM_CAP:
        raise CapExceededError(
            f"C({m},{K}) = {count} subsets exceeds the enumeration cap "
            f"{OPTIMUM_CAP}")
    best_set = None
    best_val = -np.inf
    for combo in combinations(range(1, m + 1), K):
        val = f.value(combo)
        if val > best_val:
            best_val = val
            best_set = combo
    return best_set, float(best_val)


def max_marginal(f, selected):
    """Largest available gain given the current selection."""
    m = f.ground.size
    mask = f.ground.mask(selected)
    return max(g for _, g in _step_gains(f, mask, m))


def gap_recurrence_margins(result, optimum_value, gamma):
    """Margins of the per-step contraction of the gap to the optimum.

    For a greedy run whose step-j gain is within tau_j of the best
    available gain, the remaining gap D_j = optimum - value_so_far obeys

        D_{j+1} <= (1 - gamma/K) * D_j + tau_j,

    where gamma is the diminishing-returns ratio of the objective and
    tau_j = best_gains[j] - gains[j] is the realized slack. Returns the
    slack of that inequality at every step; all entries are nonnegative
    up to float noise when the guarantee holds.
    """
    K = len(result.selected)
    deltas = [optimum_value] + [optimum_value - v for v in result.values]
    margins = []
    for j in range(K):
        tau = result.best_gains[j] - result.gains[j]
        margins.append((1.0 - gamma / K) * deltas[j] + tau - deltas[j + 1])
    return margins
