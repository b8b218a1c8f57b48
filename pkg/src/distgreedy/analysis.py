"""Bound computations and post-hoc audits of recorded runs.

The closed-form consensus error after T averaging steps is

    epsilon(T) = sqrt(n) * mu^T * value_cap,

and the smallest threshold width that provably keeps every agent's
argmax alive through thresholding and intersection is 4 * epsilon(T).
A run that uses a feasible psi earns the additive guarantee

    achieved >= (1 - 1/e) * optimum - K * (psi + 2 * epsilon(T)),

with 1 - 1/e replaced by 1 - exp(-gamma_min) when the locals are only
approximately submodular with ratio at least gamma_min > 0. Everything
here is computed from trace data alone, never from re-simulation.
"""

import math

import numpy as np

from .baseline import brute_force_optimum, max_marginal
from .errors import CapExceededError
from .protocol import RunConfig, run

AUDIT_SLACK = 1e-9
CONSERVATION_TOL = 1e-12


def epsilon(n, mu, T, value_cap):
    """Worst-case distance to the true average after T averaging steps."""
    if n < 1:
        raise ValueError("need at least one agent")
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"contraction rate mu={mu} outside [0, 1); "
                         "averaging would not converge")
    if T < 1:
        raise ValueError("T must be >= 1")
    if value_cap < 0:
        raise ValueError("value cap must be nonnegative")
    return math.sqrt(n) * mu ** T * value_cap


def psi_min(n, mu, T, value_cap):
    """Smallest threshold width that keeps every agent's argmax alive."""
    return 4.0 * epsilon(n, mu, T, value_cap)


class CheckResult:
    def __init__(self, name, passed, margin=None, detail="", skipped=False):
        self.name = name
        self.passed = passed
        self.margin = margin
        self.detail = detail
        self.skipped = skipped

    def __repr__(self):
        state = "skipped" if self.skipped else ("pass" if self.passed else "FAIL")
        margin = "" if self.margin is None else f", margin={self.margin:.3g}"
        return f"CheckResult({self.name}: {state}{margin})"


class AuditReport:
    def __init__(self, checks):
        self.checks = {c.name: c for c in checks}

    @property
    def passed(self):
        return all(c.passed or c.skipped for c in self.checks.values())

    def __iter__(self):
        return iter(self.checks.values())

    def __getitem__(self, name):
        return self.checks[name]

    def __repr__(self):
        return f"AuditReport(passed={self.passed}, checks={list(self.checks)})"


def _round_peaks(record):
    """Per-agent argmax elements at the end of the averaging phase."""
    X_T = record.x_steps[-1]
    return tuple(record.remaining[int(np.argmax(row))] for row in X_T)


def audit_trace(trace, family, slack=AUDIT_SLACK):
    """Evaluate every per-round protocol guarantee from recorded data.

    Checks, in order: the averaging steps conserve the network mean; the
    recorded deviations stay under the geometric envelope; at the end of
    averaging no agent undervalues another agent's argmax by more than
    4*epsilon(T); the intersection phase ends with all agents holding
    the same nonempty set, equal to the network-wide intersection and
    containing every agent's argmax; and each round's realized gain in
    the average objective is within psi + 2*epsilon(T) of the best
    available gain.
    """
    n, T, mu, cap, psi = trace.n, trace.T, trace.mu, trace.value_cap, trace.psi
    eps_T = epsilon(n, mu, T, cap) if n >= 1 else 0.0
    avg = family.average()

    drift = 0.0
    for rec in trace.rounds:
        mean0 = rec.x_steps[0].mean(axis=0)
        for t in range(1, T + 1):
            step_drift = float(np.abs(rec.x_steps[t].mean(axis=0) - mean0).max())
            drift = max(drift, step_drift)
    conservation = CheckResult(
        "mean_conservation", drift <= CONSERVATION_TOL,
        margin=CONSERVATION_TOL - drift,
        detail=f"max drift {drift:.3g}")

    dev_margin = np.inf
    for rec in trace.rounds:
        for t in range(1, T + 1):
            bound = math.sqrt(n) * mu ** t * cap
            dev_margin = min(dev_margin, bound - float(rec.deviations[t]))
    consensus_error = CheckResult(
        "consensus_error", dev_margin >= -slack, margin=float(dev_margin),
        detail="deviation vs sqrt(n)*mu^t*cap envelope")

    gap_margin = np.inf
    for rec in trace.rounds:
        X_T = rec.x_steps[-1]
        peak_cols = [int(np.argmax(row)) for row in X_T]
        for i in range(n):
            own_max = float(X_T[i].max())
            worst = own_max - float(min(X_T[i, c] for c in peak_cols))
            gap_margin = min(gap_margin, 4.0 * eps_T - worst)
    argmax_gap = CheckResult(
        "argmax_gap", gap_margin >= -slack, margin=float(gap_margin),
        detail="cross-agent argmax undervaluation vs 4*epsilon(T)")

    agreement_ok = True
    agreement_detail = ""
    for rec in trace.rounds:
        first_step = rec.candidate_steps[0]
        final_step = rec.candidate_steps[-1]
        global_intersection = frozenset.intersection(*first_step)
        peaks = frozenset(_round_peaks(rec))
        if any(s != final_step[0] for s in final_step[1:]):
            agreement_ok, agreement_detail = False, f"round {rec.index}: sets differ"
            break
        if final_step[0] != global_intersection:
            agreement_ok, agreement_detail = (
                False, f"round {rec.index}: not the network-wide intersection")
            break
        if not final_step[0]:
            agreement_ok, agreement_detail = False, f"round {rec.index}: empty"
            break
        if not peaks <= final_step[0]:
            agreement_ok, agreement_detail = (
                False, f"round {rec.index}: drops an agent argmax")
            break
    candidate_agreement = CheckResult(
        "candidate_agreement", agreement_ok, detail=agreement_detail)

    gain_margin = np.inf
    before = ()
    for rec in trace.rounds:
        realized = avg.value(rec.selected_after) - avg.value(before)
        best = max_marginal(avg, before)
        gain_margin = min(gain_margin, realized - (best - psi - 2.0 * eps_T))
        before = rec.selected_after
    round_gain = CheckResult(
        "round_gain", gain_margin >= -slack, margin=float(gain_margin),
        detail="realized gain vs best gain - psi - 2*epsilon(T)")

    return AuditReport([conservation, consensus_error, argmax_gap,
                        candidate_agreement, round_gain])


def check_approx_bound(trace, optimum_value, slack=AUDIT_SLACK):
    """The headline additive guarantee against the exact optimum.

    When the additive gap exceeds the achievable value the right-hand
    side drops at or below zero and the inequality holds trivially; the
    result is then flagged vacuous so sweeps can tell the regimes apart.
    """
    eps_T = epsilon(trace.n, trace.mu, trace.T, trace.value_cap)
    gap = trace.K * (trace.psi + 2.0 * eps_T)
    rhs = (1.0 - 1.0 / math.e) * optimum_value - gap
    vacuous = rhs <= 0.0
    passed = trace.value >= rhs - slack
    detail = f"rhs={rhs:.6g}" + (" (vacuous)" if vacuous else "")
    result = CheckResult("approx_bound", passed, margin=trace.value - rhs,
                         detail=detail)
    result.rhs = rhs
    result.vacuous = vacuous
    return result

def check_ratio_bound(trace, optimum_value, gammas, slack=AUDIT_SLACK):
    """Additive guarantee under approximate submodularity.

    `gammas` are the exact diminishing-returns ratios of the local
    functions; the guarantee uses their minimum and requires it to be
    positive, otherwise the check is skipped with a reason.
    """
    gammas = list(gammas)
    if not gammas:
        return CheckResult("ratio_bound", True, skipped=True,
                           detail="no ratios supplied")
    gamma_min = min(gammas)
    if gamma_min <= 0.0:
        return CheckResult("ratio_bound", True, skipped=True,
                           detail=f"minimum ratio {gamma_min} is not positive")
    eps_T = epsilon(trace.n, trace.mu, trace.T, trace.value_cap)
    gap = trace.K * (trace.psi + 2.0 * eps_T)
    rhs = (1.0 - math.exp(-gamma_min)) * optimum_value - gap
    passed = trace.value >= rhs - slack
    result = CheckResult("ratio_bound", passed, margin=trace.value - rhs,
                         detail=f"gamma_min={gamma_min:.6g}, rhs={rhs:.6g}")
    result.rhs = rhs
    result.gamma_min = gamma_min
    return result


class BoundsReport:
    """Everything the bound machinery derives from one run."""

    def __init__(self, achieved, epsilon_T, psi, psi_floor, additive_gap,
                 optimum, approx_rhs, vacuous, gamma_min, ratio_rhs, checks):
        self.achieved = achieved
        self.epsilon_T = epsilon_T
        self.psi = psi
        self.psi_floor = psi_floor
        self.additive_gap = additive_gap      # K * (psi + 2 * epsilon_T)
        self.optimum = optimum
        self.approx_rhs = approx_rhs
        self.vacuous = vacuous
        self.gamma_min = gamma_min
        self.ratio_rhs = ratio_rhs
        self.checks = checks

    @property
    def passed(self):
        return self.checks.passed

    def to_jsonable(self):
        return {
            "achieved": self.achieved,
            "epsilon_T": self.epsilon_T,
            "psi": self.psi,
            "psi_floor": self.psi_floor,
            "additive_gap": self.additive_gap,
            "optimum": self.optimum,
            "approx_rhs": self.approx_rhs,
            "vacuous": self.vacuous,
            "gamma_min": self.gamma_min,
            "ratio_rhs": self.ratio_rhs,
            "checks": {
                c.name: {"passed": c.passed, "margin": c.margin,
                         "detail": c.detail, "skipped": c.skipped}
                for c in self.checks
            },
        }


def bounds_report(trace, family, optimum=None, gammas=None, slack=AUDIT_SLACK):
    """Assemble the audit plus the guarantee checks into one report.

    optimum may be the exact optimal value, or None to leave the
    guarantee checks out (for instances past the enumeration cap).
    """
    audit = audit_trace(trace, family, slack)
    eps_T = epsilon(trace.n, trace.mu, trace.T, trace.value_cap)
    checks = list(audit)
    approx_rhs = vacuous = gamma_min = ratio_rhs = None
    if optimum is not None:
        approx = check_approx_bound(trace, optimum, slack)
        checks.append(approx)
        approx_rhs, vacuous = approx.rhs, approx.vacuous
        if gammas is not None:
            ratio = check_ratio_bound(trace, optimum, gammas, slack)
            checks.append(ratio)
            if not ratio.skipped:
                gamma_min, ratio_rhs = ratio.gamma_min, ratio.rhs
    return BoundsReport(trace.value, eps_T, trace.psi,
                        psi_min(trace.n, trace.mu, trace.T, trace.value_cap),
                        trace.K * (trace.psi + 2.0 * eps_T), optimum,
                        approx_rhs, vacuous, gamma_min, ratio_rhs,
                        AuditReport(checks))


class SweepRow:
    def __init__(self, T, psi, eps, additive_gap, achieved, rhs, vacuous):
        self.T = T
        self.psi = psi
        self.epsilon = eps
        self.additive_gap = additive_gap
        self.achieved = achieved
        self.rhs = rhs
        self.vacuous = vacuous


def tradeoff_sweep(config, T_values, psi="auto"):
    """Run the protocol across a range of averaging lengths T.

    With psi="auto" each point uses its own feasible floor, so the
    additive gap contracts by a factor mu per extra averaging step; with
    a fixed numeric psi the gap decays toward K * psi instead. The exact
    optimum (for the guarantee column) is enumerated once, since it does
    not depend on T.
    """
    T_values = list(T_values)
    if any(b <= a for a, b in zip(T_values, T_values[1:])):
        raise ValueError("T values must be strictly ascending")
    avg = config.family.average()
    try:
        _, optimum = brute_force_optimum(avg, config.K)
    except CapExceededError:
        optimum = None
    rows = []
    for T in T_values:
        point = RunConfig(
            config.network, config.mixing, config.family, config.K, T,
            psi=None if psi == "auto" else float(psi),
            include_self_in_intersection=config.include_self_in_intersection,
            use_singleton_cap=config.use_singleton_cap,
            threshold_slack=config.threshold_slack, seed=config.seed)
        trace = run(point)
        eps_T = epsilon(trace.n, trace.mu, T, trace.value_cap)
        gap = trace.K * (trace.psi + 2.0 * eps_T)
        if optimum is None:
            rhs = vac = None
        else:
            rhs = (1.0 - 1.0 / math.e) * optimum - gap
            vac = rhs <= 0.0
        rows.append(SweepRow(T, trace.psi, eps_T, gap, trace.value, rhs, vac))
    return rows
