"""Verification suites over the exact oracles and randomized instances.

Each suite compares an implemented quantity against an independently
computed reference and emits one record per comparison.  The command-line
front end aggregates the records; the acceptance tests assert on them
directly.  Randomized generators draw their probabilities from sixteenths
so that enumerated path weights stay exact binary floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import empirical_occupancy, estimate
from .interval_functions import (
    AdditiveIF,
    GeneralIF,
    StepFunction,
    check_product_variation_bound,
    defect_profile,
    kolmogorov_integral,
    matrix_norm,
    multiplicative_transform,
    plus_identity,
    product_integral,
    variation_norm,
)
from .intervals import Interval
from .multistate import PathSpace
from .simulation import (
    CensoringConfig,
    ScenarioConfig,
    TransitionRule,
    exact_pathspace,
    forced_exit_scenario,
    illness_death_scenario,
    sample_path,
    simulate_sample,
    subject_rng,
    two_state_scenario,
)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    lhs: float
    rhs: float
    tol: float
    passed: bool
    detail: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "lhs", float(self.lhs))
        object.__setattr__(self, "rhs", float(self.rhs))
        object.__setattr__(self, "tol", float(self.tol))
        object.__setattr__(self, "passed", bool(self.passed))


def close_record(name: str, lhs: float, rhs: float, tol: float, detail: str = "") -> CheckRecord:
    return CheckRecord(name, lhs, rhs, tol, abs(lhs - rhs) <= tol, detail)


def all_passed(records) -> bool:
    return all(r.passed for r in records)


def worst_gap(records) -> float:
    return max((abs(r.lhs - r.rhs) for r in records), default=0.0)


# -- randomized instance generators ------------------------------------------

_DYADIC_TIMES = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)


def _sixteenths(rng: np.random.Generator, total_cap: int, count: int) -> list[float]:
    """``count`` nonnegative sixteenths whose total stays at or below the cap."""
    raw = rng.integers(0, total_cap + 1, size=count)
    scale_down = raw.sum()
    if scale_down > total_cap:
        keep = rng.permutation(count)
        budget = total_cap
        out = np.zeros(count, dtype=int)
        for i in keep:
            out[i] = min(raw[i], budget)
            budget -= out[i]
        raw = out
    return [int(v) / 16.0 for v in raw]


def random_scenario(
    rng: np.random.Generator,
    *,
    markov_only: bool = False,
    progressive: bool = False,
    positive_occupation: bool = False,
    forced_exit: bool = False,
) -> ScenarioConfig:
    """Small grid scenario with dyadic times and sixteenth probabilities.

    ``positive_occupation`` keeps every state occupied at all times (full
    initial support, exit mass strictly below one); ``forced_exit`` plants
    one certain total exit so that some occupation hits zero;
    ``progressive`` restricts transitions to higher-numbered states.
    """
    dim = int(rng.integers(2, 5))
    n_times = int(rng.integers(1, 4))
    grid = tuple(sorted(rng.choice(_DYADIC_TIMES, size=n_times, replace=False)))
    tau = 4.0

    if positive_occupation:
        counts = rng.multinomial(16 - dim, [1.0 / dim] * dim) + 1
    else:
        counts = rng.multinomial(16, [1.0 / dim] * dim)
    initial = tuple(int(c) / 16.0 for c in counts)

    kinds = ("markov",) if markov_only else ("markov", "entry_time_dependent", "duration_dependent")
    kind = str(rng.choice(kinds))

    if forced_exit and counts[0] == 0:
        donor = int(np.argmax(counts))
        counts[donor] -= 1
        counts[0] += 1
        initial = tuple(int(c) / 16.0 for c in counts)

    rules = []
    for t in grid:
        for state in range(1, dim + 1):
            if rng.random() < 0.35:
                continue
            if progressive:
                targets = [s for s in range(state + 1, dim + 1)]
            else:
                targets = [s for s in range(1, dim + 1) if s != state]
            if not targets:
                continue
            chosen = list(
                rng.choice(targets, size=min(len(targets), int(rng.integers(1, 3))), replace=False)
            )
            cap = 12 if positive_occupation else 16
            probs = _sixteenths(rng, cap, len(chosen))
            pairs = tuple((int(s), p) for s, p in zip(chosen, probs) if p > 0.0)
            if not pairs:
                continue
            when = None
            if kind == "entry_time_dependent" and rng.random() < 0.5:
                candidates = [0.0] + [g for g in grid if g < t]
                when = float(rng.choice(candidates))
            elif kind == "duration_dependent" and rng.random() < 0.5:
                candidates = [t] + [t - g for g in grid if g < t]
                when = float(rng.choice(candidates))
            rules.append(TransitionRule(float(t), state, pairs, when=when))
            if when is not None and rng.random() < 0.5:
                # add a default row so the feature match actually selects
                fallback = _sixteenths(rng, cap, len(chosen))
                fallback_pairs = tuple(
                    (int(s), p) for s, p in zip(chosen, fallback) if p > 0.0
                )
                if fallback_pairs:
                    rules.append(TransitionRule(float(t), state, fallback_pairs, when=None))

    if forced_exit:
        # a certain total exit from state 1 at the last grid time, with no
        # simultaneous inflow into it, so its occupation hits exactly zero
        last = float(grid[-1])
        rules = [
            r
            for r in rules
            if not (
                r.time == last
                and (r.from_state == 1 or any(to == 1 for to, _ in r.probs))
            )
        ]
        rules.append(TransitionRule(last, 1, ((min(2, dim), 1.0),)))

    return ScenarioConfig(dim, tau, grid, kind, initial, tuple(rules))


def random_jump_function(
    rng: np.random.Generator, max_dim: int = 4, max_atoms: int = 6, max_norm: float = 0.9
) -> AdditiveIF:
    """Pure-jump additive function with bounded atom norms on dyadic times."""
    dim = int(rng.integers(1, max_dim + 1))
    n_atoms = int(rng.integers(1, max_atoms + 1))
    times = sorted(rng.choice(np.arange(1, 17) * 0.25, size=n_atoms, replace=False))
    atoms = []
    for t in times:
        raw = rng.uniform(-1.0, 1.0, size=(dim, dim))
        target = max_norm * rng.uniform(0.1, 1.0)
        atoms.append((float(t), raw * (target / matrix_norm(raw))))
    return AdditiveIF(dim, tuple(atoms))


def random_subinterval(rng: np.random.Generator, tau: float = 4.0) -> Interval:
    """Random dyadic subinterval of (0, tau], any of the four shapes."""
    ticks = [k * 0.25 for k in range(0, int(tau * 4) + 1)]
    lo, hi = sorted(rng.choice(len(ticks), size=2, replace=False))
    lo_t, hi_t = ticks[lo], ticks[hi]
    if lo_t == 0.0:
        lo_closed = False
    else:
        lo_closed = bool(rng.integers(0, 2))
    hi_closed = bool(rng.integers(0, 2))
    if rng.random() < 0.1 and lo_t > 0.0:
        return Interval.point(lo_t)
    return Interval(lo_t, hi_t, lo_closed, hi_closed)


def default_corpus() -> dict[str, PathSpace]:
    return {
        "illness-death": exact_pathspace(illness_death_scenario()),
        "two-state": exact_pathspace(two_state_scenario()),
        "forced-exit": exact_pathspace(forced_exit_scenario()),
    }


def random_corpus(rng: np.random.Generator, count: int, **kwargs) -> list[PathSpace]:
    return [exact_pathspace(random_scenario(rng, **kwargs)) for _ in range(count)]


# -- suites -------------------------------------------------------------------


def occupation_identity_checks(ps: PathSpace, label: str = "") -> list[CheckRecord]:
    """Initial occupation pushed through the hazard's product integral must
    reproduce the enumerated occupation at every grid time, Markov or not."""
    hazard = ps.hazard_matrix()
    p0 = ps.occupation_vector(0.0)
    records = []
    for t in ps.grid:
        lhs = p0 @ product_integral(hazard, Interval.open_closed(0.0, t))
        rhs = ps.occupation_vector(t)
        records.append(
            close_record(
                "occupation-identity",
                float(np.abs(lhs - rhs).max()),
                0.0,
                1e-10,
                detail=f"{label} t={t:g}",
            )
        )
    return records


def hazard_defect_checks(ps: PathSpace, depths: int = 6, label: str = "") -> list[CheckRecord]:
    """Defect of (transition - identity) against the hazard along the schedule."""
    window = Interval.open_closed(0.0, ps.tau)
    profile = defect_profile(ps.transition_deviation_if(), ps.hazard_matrix(), window, depths)
    values = [v for _, v in profile]
    non_increasing = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    return [
        CheckRecord(
            "hazard-defect",
            values[-1],
            0.0,
            1e-10,
            passed=(values[-1] < 1e-10) and non_increasing,
            detail=f"{label} profile " + " ".join(f"{v:.3g}" for v in values),
        )
    ]


def hazard_defect_table(ps: PathSpace, depths: int = 6) -> list[tuple[str, float]]:
    window = Interval.open_closed(0.0, ps.tau)
    return defect_profile(ps.transition_deviation_if(), ps.hazard_matrix(), window, depths)


def chapman_kolmogorov_checks(ps: PathSpace | None = None) -> list[CheckRecord]:
    """The non-Markov witness on the illness-death oracle.

    The direct conditional probability of staying ill over (1, 3] is 0.2,
    while the multiplicative transform of the transition function (equal to
    the split product) has entry 0.4 there, so the transition function is
    not multiplicative.  Both constants were enumerated by hand over the
    five trajectories.
    """
    if ps is None:
        ps = exact_pathspace(illness_death_scenario())
    window = Interval.open_closed(1.0, 3.0)
    direct = ps.transition(2, 2, window)
    transform = multiplicative_transform(ps.transition_if(), window)[1, 1]
    left = ps.transition_matrix(Interval.open_closed(1.0, 2.0))
    right = ps.transition_matrix(Interval.open_closed(2.0, 3.0))
    split_gap = np.abs(ps.transition_matrix(window) - left @ right).max()
    return [
        close_record("chapman-kolmogorov-direct", direct, 0.2, 1e-12),
        close_record("chapman-kolmogorov-transform", transform, 0.4, 1e-12),
        CheckRecord(
            "chapman-kolmogorov-witness",
            split_gap,
            0.1,
            0.0,
            passed=split_gap >= 0.1,
            detail="max entrywise gap between P(a) and the split product",
        ),
    ]


def count_mean_defect_checks(ps: PathSpace, depths: int = 6, label: str = "") -> list[CheckRecord]:
    """Refinement sums of |status mean - expected count| vanish per pair."""
    window = Interval.open_closed(0.0, ps.tau)
    records = []
    for j in range(1, ps.dim + 1):
        for k in range(1, ps.dim + 1):
            if k == j:
                continue
            profile = defect_profile(
                ps.indicator_mean_if(j, k), ps.counting_mean_if(j, k), window, depths
            )
            final = profile[-1][1]
            records.append(
                CheckRecord(
                    "count-mean-defect",
                    final,
                    0.0,
                    1e-10,
                    passed=final < 1e-10,
                    detail=f"{label} pair ({j},{k})",
                )
            )
    return records


def transform_duality_checks(
    rng: np.random.Generator, count: int = 100, subintervals: int = 10
) -> list[CheckRecord]:
    """Multiplicative transform of (identity + jumps) against the exact
    product integral, plus the exponential variation envelope."""
    records = []
    for i in range(count):
        mu = random_jump_function(rng)
        for _ in range(subintervals):
            a = random_subinterval(rng)
            via_transform = multiplicative_transform(plus_identity(mu), a)
            exact = product_integral(mu, a)
            records.append(
                close_record(
                    "transform-duality",
                    matrix_norm(via_transform - exact),
                    0.0,
                    1e-10,
                    detail=f"instance {i} on {a}",
                )
            )
        bound = check_product_variation_bound(mu, Interval.open_closed(0.0, 4.0))
        records.append(
            CheckRecord(
                "transform-bound",
                bound.lhs,
                bound.rhs,
                1e-12,
                passed=bound.ok,
                detail=f"instance {i}",
            )
        )
    return records


def _positivity_blocks(ps: PathSpace, j: int) -> list[tuple[float, float]]:
    """Maximal (lo, hi) with occupation(j, u-) > 0 for every u in (lo, hi].

    The occupation is constant between grid times, so a block runs from the
    first tick where it is positive up to the tick where it vanishes.
    """
    ticks = [0.0] + list(ps.grid)
    values = [ps.occupation(j, t) for t in ticks]
    blocks = []
    start = None
    for tick, value in zip(ticks, values):
        if value > 0.0 and start is None:
            start = tick
        if value == 0.0 and start is not None:
            blocks.append((start, tick))
            start = None
    if start is not None:
        blocks.append((start, ps.tau))
    return [(lo, hi) for lo, hi in blocks if hi > lo]


def left_occupation_reciprocal(ps: PathSpace, j: int) -> StepFunction:
    """The step function t -> 1 / occupation(j, t-), zero where undefined.

    Left-continuous: the value at an event time is the value of the
    segment below it.
    """
    times = ps.event_times
    betweens = []
    for tick in (0.0,) + times:
        value = ps.occupation(j, tick)
        betweens.append(1.0 / value if value > 0.0 else 0.0)
    return StepFunction(times, tuple(betweens[: len(times)]), tuple(betweens))


def hazard_integral_checks(ps: PathSpace, label: str = "") -> list[CheckRecord]:
    """The hazard as the integral of 1/occupation-just-before against the
    expected-count measure, on subintervals of the positivity windows, and
    the sup-bound of the integral."""
    records = []
    hazard = ps.hazard_matrix()
    for j in range(1, ps.dim + 1):
        reciprocal = left_occupation_reciprocal(ps, j)
        for k in range(1, ps.dim + 1):
            if k == j:
                continue
            counts = ps.counting_mean_if(j, k)
            target = hazard.entry(j, k)
            for lo, hi in _positivity_blocks(ps, j):
                if hi <= lo:
                    continue
                shapes = [Interval.open_closed(lo, hi), Interval.open_open(lo, hi)]
                if lo > 0.0:
                    shapes += [Interval.closed(lo, hi), Interval.closed_open(lo, hi)]
                mid = 0.5 * (lo + hi)
                if lo < mid < hi:
                    shapes.append(Interval.open_closed(lo, mid))
                    shapes.append(Interval.open_closed(mid, hi))
                for a in shapes:
                    integral = kolmogorov_integral(reciprocal, counts, a)
                    records.append(
                        close_record(
                            "hazard-integral",
                            integral[0, 0],
                            target(a)[0, 0],
                            1e-12,
                            detail=f"{label} ({j},{k}) on {a}",
                        )
                    )
                    envelope = reciprocal.sup_abs(a) * counts.variation(a)
                    records.append(
                        CheckRecord(
                            "integral-bound",
                            matrix_norm(integral),
                            envelope,
                            1e-12,
                            passed=matrix_norm(integral) <= envelope + 1e-12,
                            detail=f"{label} ({j},{k}) on {a}",
                        )
                    )
    return records


def markov_product_checks(
    rng: np.random.Generator, count: int = 50, subintervals: int = 8
) -> list[CheckRecord]:
    """Transition probabilities equal the hazard's product integral in the
    Markov case, for all four interval shapes.

    Scenarios keep every occupation positive so the zero-conditioning
    convention never has to stand in for an actual conditional probability.
    """
    records = []
    for i in range(count):
        scenario = random_scenario(rng, markov_only=True, positive_occupation=True)
        ps = exact_pathspace(scenario)
        hazard = ps.hazard_matrix()
        for _ in range(subintervals):
            a = random_subinterval(rng, tau=ps.tau)
            gap = matrix_norm(ps.transition_matrix(a) - product_integral(hazard, a))
            records.append(
                close_record("markov-product", gap, 0.0, 1e-10, detail=f"instance {i} on {a}")
            )
    return records


def occupation_bound_checks(spaces, labels=None) -> list[CheckRecord]:
    """Occupation floors on all grid pairs; equality where no mass flows in."""
    records = []
    labels = labels or [f"instance {i}" for i in range(len(spaces))]
    for ps, label in zip(spaces, labels):
        inflow = {j: False for j in range(1, ps.dim + 1)}
        for u in ps.event_times:
            mass = ps.jump_mass(u)
            for k in range(1, ps.dim + 1):
                if mass[:, k - 1].any():
                    inflow[k] = True
        ticks = [0.0] + list(ps.grid)
        for j in range(1, ps.dim + 1):
            for si, s in enumerate(ticks):
                for t in ticks[si:]:
                    bound = ps.occupation_lower_bound(j, s, t)
                    records.append(
                        CheckRecord(
                            "occupation-lower-bound",
                            bound.lhs,
                            bound.rhs,
                            1e-12,
                            passed=bound.ok,
                            detail=f"{label} j={j} on [{s:g},{t:g}]",
                        )
                    )
                    if not inflow[j]:
                        records.append(
                            close_record(
                                "occupation-bound-equality",
                                bound.lhs,
                                bound.rhs,
                                1e-12,
                                detail=f"{label} j={j} on [{s:g},{t:g}] (no inflow)",
                            )
                        )
    return records


def extinction_checks(spaces, labels=None) -> list[CheckRecord]:
    """Wherever an occupation hits zero the exit atoms there must total one."""
    records = []
    labels = labels or [f"instance {i}" for i in range(len(spaces))]
    seen_extinction = False
    for ps, label in zip(spaces, labels):
        for j in range(1, ps.dim + 1):
            report = ps.extinction_report(j)
            if not report.has_extinction:
                continue
            seen_extinction = True
            for boundary in report.boundaries:
                records.append(
                    close_record(
                        "extinction-exit",
                        boundary.exit_mass,
                        1.0,
                        1e-12,
                        detail=f"{label} j={j} at t={boundary.time:g}",
                    )
                )
    if not seen_extinction:
        records.append(
            CheckRecord(
                "extinction-exit",
                0.0,
                0.0,
                0.0,
                passed=False,
                detail="no extinction boundary found in the corpus",
            )
        )
    return records


def uncensored_identity_checks(
    rng: np.random.Generator, count: int = 1000
) -> list[CheckRecord]:
    """On fully observed samples the derived occupation curve must equal the
    raw observed proportions at every event time."""
    none = CensoringConfig("none")
    records = []
    for i in range(count):
        scenario = random_scenario(rng)
        n = int(rng.integers(1, 21))
        seed = int(rng.integers(0, 2**31))
        sample = simulate_sample(scenario, none, n, seed)
        grid = estimate(sample, dim=scenario.dim)
        worst = 0.0
        probe_times = (0.0,) + grid.times
        for t in probe_times:
            estimated = grid.occupation_at(t) if t > 0.0 else grid.p0
            observed = np.array(
                [empirical_occupancy(sample, j, t) for j in range(1, grid.dim + 1)]
            )
            worst = max(worst, float(np.abs(estimated - observed).max()))
        records.append(
            close_record("uncensored-identity", worst, 0.0, 1e-12, detail=f"sample {i} (n={n})")
        )
    return records


def convergence_study(
    scenario: ScenarioConfig,
    conforming: CensoringConfig,
    violating: CensoringConfig | None,
    ns,
    seed: int,
    sup_tol: float = 0.02,
    bias_floor: float = 0.05,
) -> tuple[list[CheckRecord], list[dict]]:
    """Sup-norm error of the estimated occupation curve against the exact one.

    Runs the conforming arm at each sample size (errors must strictly
    decrease and end below ``sup_tol``) and the violating arm at the
    largest size (its error must exceed ``bias_floor``).
    """
    oracle = exact_pathspace(scenario)
    truth = {t: oracle.occupation_vector(t) for t in scenario.grid}

    def sup_error(sample) -> float:
        grid = estimate(sample, dim=scenario.dim, upto=scenario.tau)
        return max(
            float(np.abs(grid.occupation_at(t) - truth[t]).max()) for t in scenario.grid
        )

    table = []
    errors = []
    for n in ns:
        sample = simulate_sample(scenario, conforming, int(n), seed, arm=0)
        err = sup_error(sample)
        errors.append(err)
        table.append({"arm": "conforming", "n": int(n), "sup_error": err})

    records = []
    if len(ns) > 1:
        smallest_drop = min(a - b for a, b in zip(errors, errors[1:]))
        records.append(
            CheckRecord(
                "convergence-decreasing",
                smallest_drop,
                0.0,
                0.0,
                passed=smallest_drop > 0.0,
                detail="errors " + " ".join(f"{e:.4f}" for e in errors),
            )
        )
    records.append(
        CheckRecord(
            "convergence-final",
            errors[-1],
            sup_tol,
            0.0,
            passed=errors[-1] < sup_tol,
            detail=f"n={ns[-1]}",
        )
    )
    if violating is not None:
        sample = simulate_sample(scenario, violating, int(ns[-1]), seed, arm=1)
        biased = sup_error(sample)
        table.append({"arm": "violating", "n": int(ns[-1]), "sup_error": biased})
        records.append(
            CheckRecord(
                "violation-bias",
                biased,
                bias_floor,
                0.0,
                passed=biased > bias_floor,
                detail=f"n={ns[-1]}",
            )
        )
    return records, table


def sampler_agreement_checks(
    rng: np.random.Generator, scenario: ScenarioConfig, draws: int = 10**5, tol: float = 0.01
) -> list[CheckRecord]:
    """Empirical occupation frequencies of the sampler against enumeration."""
    ps = exact_pathspace(scenario)
    counts = np.zeros(scenario.dim)
    for _ in range(draws):
        path = sample_path(rng, scenario)
        counts[path.state_at(scenario.tau) - 1] += 1
    freq = counts / draws
    truth = ps.occupation_vector(scenario.tau)
    return [
        close_record(
            "sampler-agreement",
            float(np.abs(freq - truth).max()),
            0.0,
            tol,
            detail=f"{draws} draws at t={scenario.tau:g}",
        )
    ]
