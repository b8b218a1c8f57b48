"""Synchronous-round simulation of the distributed greedy selection.

The agents build a solution of size K over K rounds. Within a round,
every agent starts from its own marginal gains for the remaining
elements, runs T steps of gossip averaging with the mixing matrix, keeps
the elements whose averaged gain is within psi of its own maximum,
intersects candidate sets with its neighbors for diameter-many steps,
and finally appends the surviving element with the smallest global
index. Because the label order is global and the intersection reaches a
network-wide fixed point, all agents append the same element, so the
selected set stays identical everywhere without any further
coordination.

Each time step is a global barrier: an agent reads only its neighbors'
previous-step state, and all per-step updates are pure, so evaluation
order within a step cannot change the result.
"""

import logging

import numpy as np

from .errors import ConfigError, DesyncError, InfeasiblePsiError, MonotonicityError
from .graph import diameter

logger = logging.getLogger(__name__)


class AgentState:
    """One agent's view inside a round.

    x holds the agent's running estimate of the network-average marginal
    gain for each remaining element (aligned with `remaining`);
    candidates is its surviving element set during the intersection
    phase; selected is the solution built so far, in pick order.
    """

    __slots__ = ("agent", "remaining", "x", "candidates", "selected")

    def __init__(self, agent, remaining, x, candidates=None, selected=()):
        self.agent = agent
        self.remaining = remaining
        self.x = x
        self.candidates = candidates
        self.selected = selected

    def gain(self, v):
        return float(self.x[self.remaining.index(v)])

    def __repr__(self):
        return (f"AgentState(agent={self.agent}, selected={self.selected}, "
                f"candidates={self.candidates})")


class RunConfig:
    """Everything a run needs, with the derived quantities pinned.

    psi=None resolves to the smallest feasible threshold width
    4 * sqrt(n) * mu^T * value_cap at run time. The phase lengths are
    not independent: the intersection phase always lasts exactly the
    graph diameter, so t_prime is derived, never set.
    """

    def __init__(self, network, mixing, family, K, T, psi=None,
                 include_self_in_intersection=True, use_singleton_cap=False,
                 threshold_slack=0.0, seed=0):
        if family.n != network.n:
            raise ConfigError(
                f"{family.n} local functions for {network.n} agents", field="functions")
        if mixing.n != network.n:
            raise ConfigError(
                f"{mixing.n}x{mixing.n} mixing matrix for {network.n} agents",
                field="mixing")
        if K < 1:
            raise ConfigError("cardinality budget K must be >= 1", field="K")
        if T < 1:
            raise ConfigError("consensus steps T must be >= 1", field="T")
        if psi is not None and psi < 0:
            raise ConfigError("threshold width psi must be >= 0", field="psi")
        if threshold_slack < 0:
            raise ConfigError("threshold_slack must be >= 0", field="threshold_slack")
        if use_singleton_cap and family.kind == "pair_supermodular":
            raise ConfigError(
                "the singleton gain cap is only valid for diminishing-returns "
                "families", field="tight_value_cap")
        self.network = network
        self.mixing = mixing
        self.family = family
        self.K = int(K)
        self.T = int(T)
        self.psi = None if psi is None else float(psi)
        self.include_self_in_intersection = bool(include_self_in_intersection)
        self.use_singleton_cap = bool(use_singleton_cap)
        self.threshold_slack = float(threshold_slack)
        self.seed = int(seed)

    @property
    def diameter(self):
        return diameter(self.network)

    @property
    def t_prime(self):
        return self.T + 1 + self.diameter

    @property
    def value_cap(self):
        fam = self.family
        return fam.max_singleton if self.use_singleton_cap else fam.max_total

    @property
    def mu(self):
        # single agent: averaging is the identity and the error bound is 0
        return 0.0 if self.network.n == 1 else self.mixing.mu

    def resolved_psi(self):
        if self.psi is not None:
            return self.psi
        from .analysis import psi_min
        return psi_min(self.network.n, self.mu, self.T, self.value_cap)


class RoundRecord:
    """Full state trajectory of one selection round."""

    __slots__ = ("index", "remaining", "x_steps", "deviations",
                 "candidate_steps", "chosen", "selected_after")

    def __init__(self, index, remaining, x_steps, deviations, candidate_steps,
                 chosen, selected_after):
        self.index = index
        self.remaining = remaining          # elements still available, ascending
        self.x_steps = x_steps              # (T+1, n, |remaining|) gain estimates
        self.deviations = deviations        # worst |estimate - initial mean| per step
        self.candidate_steps = candidate_steps  # per intersection step, per agent
        self.chosen = chosen
        self.selected_after = selected_after


class RunTrace:
    """Everything recorded during a run, enough to audit every guarantee."""

    def __init__(self, n, K, T, t_prime, diam, psi, mu, value_cap,
                 include_self, threshold_slack, seed, rounds, selected, value):
        self.n = n
        self.K = K
        self.T = T
        self.t_prime = t_prime
        self.diameter = diam
        self.psi = psi
        self.mu = mu
        self.value_cap = value_cap
        self.include_self = include_self
        self.threshold_slack = threshold_slack
        self.seed = seed
        self.rounds = rounds
        self.selected = selected
        self.value = value

    def __repr__(self):
        return (f"RunTrace(n={self.n}, K={self.K}, T={self.T}, "
                f"selected={self.selected}, value={self.value:.6g})")


def init_round(family, selected):
    """Start a round: each agent computes its own marginal gains.

    All agents enter with the identical selected set; the gain vector is
    indexed by the shared ascending order of the remaining elements.
    """
    ground = family.ground
    base_mask = ground.mask(selected)
    remaining = tuple(v for v in ground.elements if not base_mask >> (v - 1) & 1)
    states = []
    for agent, f in enumerate(family.functions, start=1):
        base = f.value_mask(base_mask)
        x = np.empty(len(remaining))
        for j, v in enumerate(remaining):
            g = f.value_mask(base_mask | 1 << (v - 1)) - base
            if g < 0:
                raise MonotonicityError(
                    f"agent {agent}: negative gain {g} for element {v}; "
                    f"local function is not monotone")
            x[j] = g
        states.append(AgentState(agent, remaining, x, selected=selected))
    return states


def consensus_step(states, mixing):
    """One synchronous averaging step across all agents.

    Every agent replaces its vector by the mixing-weighted combination
    of its neighbors' (and its own) previous vectors; with a doubly
    stochastic matrix the coordinatewise network mean is preserved.
    """
    remaining = states[0].remaining
    for st in states[1:]:
        if st.remaining != remaining:
            raise DesyncError(
                f"agent {st.agent} indexes {len(st.remaining)} elements, "
                f"agent {states[0].agent} indexes {len(remaining)}")
    X = np.vstack([st.x for st in states])
    X_next = mixing.W @ X
    return [AgentState(st.agent, remaining, X_next[i], st.candidates, st.selected)
            for i, st in enumerate(states)]


def threshold_candidates(state, psi, slack=0.0):
    """Elements whose averaged gain is within psi of the agent's maximum.

    Always contains the agent's own argmax. `slack` widens the cut by a
    documented fudge (default off) so that randomized float-valued
    instances are not split by last-ulp ties.
    """
    cut = float(state.x.max()) - psi - slack
    return frozenset(v for j, v in enumerate(state.remaining) if state.x[j] >= cut)


def intersection_step(states, network, include_self=True):
    """One synchronous candidate-set intersection with the neighbors.

    With include_self the agent keeps its own set in the intersection,
    which is what makes the network-wide fixed point reachable in
    diameter-many steps; the neighbors-only variant is kept for
    comparison runs and generally desynchronizes on non-complete graphs.
    """
    for st in states:
        if st.candidates is None:
            raise DesyncError(f"agent {st.agent} has no candidate set yet")
    by_agent = {st.agent: st.candidates for st in states}
    out = []
    for st in states:
        sources = list(network.neighbors(st.agent))
        if include_self:
            sources.append(st.agent)
        new = frozenset.intersection(*(by_agent[a] for a in sources))
        out.append(AgentState(st.agent, st.remaining, st.x, new, st.selected))
    return out


def select_and_append(states):
    """Close a round: all agents must hold the same nonempty candidate set.

    The element with the smallest global index is appended everywhere;
    the shared labeling is what makes this a consensus pick without any
    extra messages.
    """
    first = states[0].candidates
    for st in states[1:]:
        if st.candidates != first:
            raise DesyncError(
                f"candidate sets differ at selection time: agent "
                f"{states[0].agent} holds {sorted(first)}, agent {st.agent} "
                f"holds {sorted(st.candidates)}")
    if not first:
        raise InfeasiblePsiError(
            "candidate sets intersected to nothing; the threshold width psi "
            "is below the feasible floor for this mixing rate and T")
    chosen = min(first)
    selected_after = states[0].selected + (chosen,)
    return chosen, selected_after


def run(config):
    """Execute all K rounds and record the full trajectory."""
    network = config.network
    mixing = config.mixing
    family = config.family
    m = family.ground.size
    K = config.K
    if K > m:
        logger.warning("budget K=%d exceeds the %d available elements; clamping",
                       K, m)
        K = m
    T = config.T
    d = config.diameter
    psi = config.resolved_psi()
    slack = config.threshold_slack
    include_self = config.include_self_in_intersection

    selected = ()
    rounds = []
    for k in range(K):
        states = init_round(family, selected)
        x_steps = [np.vstack([st.x for st in states])]
        for _ in range(T):
            states = consensus_step(states, mixing)
            x_steps.append(np.vstack([st.x for st in states]))
        x_steps = np.stack(x_steps)
        x_steps.flags.writeable = False

        mean0 = x_steps[0].mean(axis=0)
        deviations = np.abs(x_steps - mean0).max(axis=(1, 2))
        deviations.flags.writeable = False

        states = [AgentState(st.agent, st.remaining, st.x,
                             threshold_candidates(st, psi, slack), st.selected)
                  for st in states]
        candidate_steps = [tuple(st.candidates for st in states)]
        for _ in range(d):
            states = intersection_step(states, network, include_self)
            candidate_steps.append(tuple(st.candidates for st in states))

        chosen, selected = select_and_append(states)
        rounds.append(RoundRecord(k, states[0].remaining, x_steps, deviations,
                                  tuple(candidate_steps), chosen, selected))

    value = family.average().value(selected)
    return RunTrace(network.n, K, T, config.t_prime, d, psi, config.mu,
                    config.value_cap, include_self, slack, config.seed,
                    rounds, selected, value)
