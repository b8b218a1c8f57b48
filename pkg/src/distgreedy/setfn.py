"""Set functions over a shared ground set.

Everything downstream (greedy baselines, the distributed protocol, the
bound audits) evaluates functions built here. Elements are the integers
1..m and are labeled identically everywhere, so index j always refers to
the same element no matter which agent holds the function. Subsets are
passed around as iterables of indices and handled internally as bitmasks.

The module also houses the exact structure checkers: monotonicity and
diminishing returns by full enumeration, and the diminishing-returns
ratio (1 exactly for submodular functions, smaller otherwise) by
minimizing the defining quotient over all subset pairs.
"""

import numpy as np

from .errors import CapExceededError, ConfigError

STRUCTURE_CAP = 10

FUNCTION_KINDS = (
    "coverage",
    "weighted_coverage",
    "facility_location",
    "pair_supermodular",
    "modular",
)


class GroundSet:
    """The shared element universe: indices 1..size, order is global."""

    def __init__(self, size):
        if size < 1:
            raise ConfigError("ground set needs at least one element", field="size")
        self.size = int(size)

    @property
    def elements(self):
        return range(1, self.size + 1)

    @property
    def full_mask(self):
        return (1 << self.size) - 1

    def mask(self, subset):
        m = 0
        for v in subset:
            if not 1 <= v <= self.size:
                raise ValueError(f"element {v} outside ground set 1..{self.size}")
            m |= 1 << (v - 1)
        return m

    def unmask(self, mask):
        return frozenset(v for v in self.elements if mask >> (v - 1) & 1)

    def __eq__(self, other):
        return isinstance(other, GroundSet) and other.size == self.size

    def __hash__(self):
        return hash(("GroundSet", self.size))

    def __repr__(self):
        return f"GroundSet(size={self.size})"


class SetFunction:
    """Nonnegative set function with memoized bitmask evaluation.

    `raw` maps a bitmask to a value; results are cached per mask, so the
    exhaustive checkers and greedy loops pay for each subset once.
    Evaluation is pure; the cache is a plain dict, whose item writes are
    atomic, so concurrent readers at worst recompute a value.
    """

    def __init__(self, ground, raw, label=""):
        self.ground = ground
        self.label = label
        self._raw = raw
        self._memo = {}

    def value_mask(self, mask):
        v = self._memo.get(mask)
        if v is None:
            v = float(self._raw(mask))
            self._memo[mask] = v
        return v

    def value(self, subset):
        return self.value_mask(self.ground.mask(subset))

    def __call__(self, subset):
        return self.value(subset)

    def table(self):
        """All 2^m values as an array indexed by bitmask."""
        return np.array([self.value_mask(m) for m in range(1 << self.ground.size)])

    def __repr__(self):
        return f"SetFunction({self.label or 'anonymous'}, m={self.ground.size})"


class StructureReport:
    """Outcome of the exhaustive structure check.

    is_submodular and ratio agree by construction on exactly-represented
    functions: the ratio equals 1 precisely when no diminishing-returns
    violation exists.
    """

    def __init__(self, is_monotone, is_submodular, ratio,
                 witness=None, ratio_witness=None, monotone_witness=None):
        self.is_monotone = is_monotone
        self.is_submodular = is_submodular
        self.submodularity_ratio = ratio
        self.witness = witness                  # (A, B, v) with gain(v|A) < gain(v|B), A subset of B
        self.ratio_witness = ratio_witness      # (A, B) pair attaining the minimal quotient
        self.monotone_witness = monotone_witness

    def __repr__(self):
        return (f"StructureReport(monotone={self.is_monotone}, "
                f"submodular={self.is_submodular}, "
                f"ratio={self.submodularity_ratio})")


def marginal_gain(f, v, subset):
    """Value increment from adding element v to `subset`.

    v must not already be in the subset. Nonnegative for monotone f.
    """
    mask = f.ground.mask(subset)
    if not 1 <= v <= f.ground.size:
        raise ValueError(f"element {v} outside ground set 1..{f.ground.size}")
    bit = 1 << (v - 1)
    if mask & bit:
        raise ValueError(f"element {v} already in the subset")
    return f.value_mask(mask | bit) - f.value_mask(mask)


def _iter_submasks(mask):
    """All submasks of `mask`, ascending, including 0 and `mask`.

    Ascending order makes the first violation or minimum found the
    lexicographically smallest witness.
    """
    sub = 0
    while True:
        yield sub
        sub = (sub - mask) & mask
        if sub == 0:
            return


def check_structure(f, cap=STRUCTURE_CAP):
    """Exhaustively classify a set function.

    Checks monotonicity over every nested pair A subset of B, diminishing
    returns over every (A, B, v) with A subset of B and v outside B, and
    computes the diminishing-returns ratio: the largest g such that for
    all pairs (A, B)

        sum over a in A minus B of [f({a} u B) - f(B)]  >=  g * [f(A u B) - f(B)].

    Pairs whose right side increment is <= 0 constrain nothing and are
    skipped; with no constraining pair at all the ratio is 1. The result
    is clamped to [0, 1]. Since the constraint depends on (A, B) only
    through B and A minus B, disjoint pairs (D, B) are enumerated instead
    of all 4^m pairs; the minimum is identical.
    """
    m = f.ground.size
    if m > cap:
        raise CapExceededError(
            f"structure check is exhaustive; |V|={m} exceeds cap {cap}")
    vals = f.table()
    full = f.ground.full_mask
    unmask = f.ground.unmask

    is_monotone = True
    monotone_witness = None
    for b in range(full + 1):
        vb = vals[b]
        for a in _iter_submasks(b):
            if vals[a] > vb:
                is_monotone = False
                monotone_witness = (unmask(a), unmask(b))
                break
        if not is_monotone:
            break

    is_submodular = True
    witness = None
    for v in range(m):
        bit = 1 << v
        rest = full & ~bit
        for b in _iter_submasks(rest):
            gain_b = vals[b | bit] - vals[b]
            for a in _iter_submasks(b):
                if vals[a | bit] - vals[a] < gain_b:
                    is_submodular = False
                    witness = (unmask(a), unmask(b), v + 1)
                    break
            if not is_submodular:
                break
        if not is_submodular:
            break

    min_quotient = np.inf
    ratio_witness = None
    for b in range(full + 1):
        vb = vals[b]
        rest = full & ~b
        for d in _iter_submasks(rest):
            if d == 0:
                continue
            denom = vals[b | d] - vb
            if denom <= 0.0:
                continue
            num = 0.0
            dd = d
            while dd:
                low = dd & -dd
                num += vals[b | low] - vb
                dd ^= low
            q = num / denom
            if q < min_quotient:
                min_quotient = q
                ratio_witness = (unmask(d), unmask(b))
    ratio = float(min(1.0, max(0.0, min_quotient)))
    if ratio >= 1.0:
        ratio_witness = None

    return StructureReport(is_monotone, is_submodular, ratio,
                           witness=witness, ratio_witness=ratio_witness,
                           monotone_witness=monotone_witness)


# ---------------------------------------------------------------------------
# Test-function corpus


def _coverage_raw(member_masks):
    def raw(mask):
        union = 0
        mm = mask
        while mm:
            low = mm & -mm
            union |= member_masks[low.bit_length() - 1]
            mm ^= low
        return union.bit_count()
    return raw


def _weighted_coverage_raw(member_masks, weights):
    def raw(mask):
        union = 0
        mm = mask
        while mm:
            low = mm & -mm
            union |= member_masks[low.bit_length() - 1]
            mm ^= low
        total = 0.0
        while union:
            low = union & -union
            total += weights[low.bit_length() - 1]
            union ^= low
        return total
    return raw


def _facility_raw(weight_matrix):
    def raw(mask):
        if mask == 0:
            return 0.0
        cols = [i for i in range(weight_matrix.shape[1]) if mask >> i & 1]
        return float(weight_matrix[:, cols].max(axis=1).sum())
    return raw


def _modular_raw(weights):
    def raw(mask):
        total = 0.0
        while mask:
            low = mask & -mask
            total += weights[low.bit_length() - 1]
            mask ^= low
        return total
    return raw


def _pair_raw(pair_mask, levels):
    def raw(mask):
        return levels[(mask & pair_mask).bit_count()]
    return raw


def _universe_masks(sets, universe):
    masks = []
    for i, s in enumerate(sets):
        m = 0
        for u in s:
            u = int(u)
            if not 1 <= u <= universe:
                raise ConfigError(
                    f"covered item {u} outside universe 1..{universe}",
                    field=f"sets[{i}]")
            m |= 1 << (u - 1)
        masks.append(m)
    return masks


def build_test_function(kind, params=None, seed=0):
    """Construct one function of the named kind.

    Parameters not supplied are drawn from `seed`. All kinds are
    normalized (empty set maps to 0) and monotone; coverage, weighted
    coverage, facility location and modular kinds are submodular, while
    pair_supermodular has increasing increments on a designated pair and
    a ratio strictly below 1. Generated weights are small integers so
    every value is exactly representable and comparisons need no
    tolerance.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)

    if kind == "coverage":
        universe = int(params.get("universe", 0) or 0)
        sets = params.get("sets")
        if sets is None:
            size = int(params.get("size", 0) or 0)
            if size < 1 or universe < 1:
                raise ConfigError(
                    "random coverage needs 'size' and 'universe'", field="functions")
            sets = [sorted(rng.choice(universe, size=int(rng.integers(1, universe + 1)),
                                      replace=False) + 1)
                    for _ in range(size)]
        if not sets:
            raise ConfigError("coverage needs at least one set", field="sets")
        if universe < 1:
            universe = max(max(s) for s in sets if s) if any(sets) else 1
        masks = _universe_masks(sets, universe)
        ground = GroundSet(len(sets))
        return SetFunction(ground, _coverage_raw(masks), label="coverage")

    if kind == "weighted_coverage":
        universe = int(params.get("universe", 0) or 0)
        sets = params.get("sets")
        if sets is None:
            size = int(params.get("size", 0) or 0)
            if size < 1 or universe < 1:
                raise ConfigError(
                    "random weighted_coverage needs 'size' and 'universe'",
                    field="functions")
            sets = [sorted(rng.choice(universe, size=int(rng.integers(1, universe + 1)),
                                      replace=False) + 1)
                    for _ in range(size)]
        if universe < 1:
            universe = max(max(s) for s in sets if s) if any(sets) else 1
        weights = params.get("weights")
        if weights is None:
            weights = [int(w) for w in rng.integers(1, 10, size=universe)]
        if len(weights) != universe:
            raise ConfigError(
                f"need {universe} item weights, got {len(weights)}", field="weights")
        if any(w < 0 for w in weights):
            raise ConfigError("item weights must be nonnegative", field="weights")
        masks = _universe_masks(sets, universe)
        ground = GroundSet(len(sets))
        return SetFunction(ground, _weighted_coverage_raw(masks, list(map(float, weights))),
                           label="weighted_coverage")

    if kind == "facility_location":
        weights = params.get("weights")
        if weights is None:
            size = int(params.get("size", 0) or 0)
            universe = int(params.get("universe", 0) or 0)
            if size < 1 or universe < 1:
                raise ConfigError(
                    "random facility_location needs 'size' and 'universe'",
                    field="functions")
            weights = rng.integers(0, 10, size=(universe, size))
        mat = np.asarray(weights, dtype=float)
        if mat.ndim != 2 or mat.shape[1] < 1:
            raise ConfigError("facility weights must be a customers x sites matrix",
                              field="weights")
        if (mat < 0).any():
            raise ConfigError("facility weights must be nonnegative", field="weights")
        ground = GroundSet(mat.shape[1])
        return SetFunction(ground, _facility_raw(mat), label="facility_location")

    if kind == "modular":
        weights = params.get("weights")
        if weights is None:
            size = int(params.get("size", 0) or 0)
            if size < 1:
                raise ConfigError("random modular needs 'size'", field="functions")
            weights = [int(w) for w in rng.integers(1, 10, size=size)]
        if any(w < 0 for w in weights):
            raise ConfigError("modular weights must be nonnegative", field="weights")
        ground = GroundSet(len(weights))
        return SetFunction(ground, _modular_raw(list(map(float, weights))),
                           label="modular")

    if kind == "pair_supermodular":
        size = int(params.get("size", 3))
        if size < 2:
            raise ConfigError("pair_supermodular needs at least two elements",
                              field="size")
        levels = tuple(float(g) for g in params.get("g", (0.0, 1.0, 3.0)))
        if len(levels) != 3 or levels[0] != 0.0 or not levels[0] <= levels[1] <= levels[2]:
            raise ConfigError(
                "'g' must be three nondecreasing values starting at 0", field="g")
        pair = params.get("pair")
        if pair is None:
            pair = tuple(sorted(rng.choice(size, size=2, replace=False) + 1))
        pair = tuple(int(v) for v in pair)
        if len(pair) != 2 or pair[0] == pair[1] or not all(1 <= v <= size for v in pair):
            raise ConfigError(f"invalid designated pair {pair}", field="pair")
        pair_mask = (1 << (pair[0] - 1)) | (1 << (pair[1] - 1))
        ground = GroundSet(size)
        return SetFunction(ground, _pair_raw(pair_mask, levels),
                           label=f"pair_supermodular{pair}")

    raise ConfigError(f"unknown function kind {kind!r}; expected one of "
                      f"{', '.join(FUNCTION_KINDS)}", field="kind")


class LocalFamily:
    """One function per agent, all over the same ground set.

    max_total is the largest full-set value across agents; every marginal
    gain of every member is bounded by it. max_singleton is the largest
    single-element value, a tighter gain bound valid for functions with
    diminishing returns.
    """

    def __init__(self, ground, functions, kind):
        self.ground = ground
        self.functions = list(functions)
        self.kind = kind
        full = ground.full_mask
        self.max_total = max(f.value_mask(full) for f in self.functions)
        self.max_singleton = max(
            f.value_mask(1 << (v - 1)) for f in self.functions for v in ground.elements)

    @property
    def n(self):
        return len(self.functions)

    def average(self):
        return average_function(self.functions)


def average_function(functions):
    """Pointwise mean of a family, as a SetFunction of its own."""
    if not functions:
        raise ValueError("need at least one function")
    ground = functions[0].ground
    for f in functions[1:]:
        if f.ground != ground:
            raise ValueError("functions live on different ground sets")
    members = list(functions)

    def raw(mask):
        return sum(f.value_mask(mask) for f in members) / len(members)

    return SetFunction(ground, raw, label="average")


def family_from_functions(functions, kind="custom"):
    """Wrap explicit per-agent functions (already on one ground set)."""
    if not functions:
        raise ConfigError("family needs at least one function", field="functions")
    ground = functions[0].ground
    for f in functions[1:]:
        if f.ground != ground:
            raise ConfigError("local functions must share the ground set",
                              field="functions")
    return LocalFamily(ground, functions, kind)


def local_family(n, kind, seed=0, params=None, identical=False):
    """Build n local functions sharing one ground set.

    With explicit data in `params` (sets / weights / pair) every agent
    holds the same function. Otherwise each agent draws its own from an
    independent stream derived from `seed`; pass identical=True to draw
    once and share.
    """
    if n < 1:
        raise ConfigError("need at least one agent", field="n")
    params = dict(params or {})
    explicit = any(k in params for k in ("sets", "weights", "pair"))
    if explicit or identical:
        proto = build_test_function(kind, params, seed)
        functions = [proto] * n
        return LocalFamily(proto.ground, functions, kind)

    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    streams = seed.spawn(n)
    functions = []
    ground = None
    for i, stream in enumerate(streams):
        f = build_test_function(kind, params, stream)
        if ground is None:
            ground = f.ground
        elif f.ground != ground:
            raise ConfigError("local functions must share the ground set",
                              field="functions")
        f.label = f"{f.label}#{i + 1}"
        functions.append(f)
    return LocalFamily(ground, functions, kind)


def family_from_config(cfg, n):
    """Build a LocalFamily from its JSON description.

    Recognized keys: kind (required), universe, sets, weights, size,
    pair, g, seed, identical.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("functions spec must be an object", field="functions")
    known = {"kind", "universe", "sets", "weights", "size", "pair", "g",
             "seed", "identical"}
    for key in cfg:
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in functions spec",
                              field=f"functions.{key}")
    if "kind" not in cfg:
        raise ConfigError("functions spec needs 'kind'", field="functions.kind")
    params = {k: v for k, v in cfg.items() if k not in ("kind", "seed", "identical")}
    return local_family(n, cfg["kind"], seed=cfg.get("seed", 0), params=params,
                        identical=bool(cfg.get("identical", False)))
