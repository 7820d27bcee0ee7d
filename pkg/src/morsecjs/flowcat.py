"""Combinatorial graded flow categories and their chain complexes.

A classical graded flow category here is the finite combinatorial shadow of
a Morse–Smale flow: a totally ordered set of points, an integer (Maslov)
grading, and signed counts of isolated flow lines between grading-adjacent
ordered pairs.  Two complexes are attached to it:

* ``morse_complex`` — one generator per point in its grading degree,
  differential given directly by the counts;
* ``cjs_cellular_complex`` — the same generators placed by the cell
  dimensions of the associated one-point-compactified quotient
  construction, then desuspended.  The two are equal degree-by-degree and
  matrix-by-matrix; the second route exists to exercise the dimension
  bookkeeping that makes the equality work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra import ChainComplex, IntegerMatrix


class FlowCategoryError(Exception):
    """Structural problem in a flow category or embedding-dimension data."""


class DSquaredError(FlowCategoryError):
    """The signed counts do not square to zero."""

    def __init__(self, violations):
        pair, total = violations[0]
        super().__init__(
            f"d^2 != 0: pair ({pair[0]}, {pair[1]}) has signed sum {total}"
        )
        self.violations = violations


class CellDimensionError(FlowCategoryError):
    """The unstable cell dimension identity failed for a generator."""


@dataclass(frozen=True)
class GradedFlowCategory:
    """Ordered points with Maslov grading and signed line counts.

    ``counts`` maps ordered pairs (i, j) — i strictly before j — with
    grading gap exactly 1 to signed integers.  Pairs with any other gap are
    rejected at construction: the moduli between them are either empty or
    positive-dimensional, and carry no count.  ``moduli_cardinalities``
    optionally records the unsigned number of flow lines for cross-checks.
    """

    points: tuple
    grading: Mapping[str, int]
    counts: Mapping[tuple, int] = field(default_factory=dict)
    moduli_cardinalities: Mapping[tuple, int] | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        if len(set(pts)) != len(pts):
            raise FlowCategoryError("point names must be unique")
        grading = {p: int(self.grading[p]) for p in pts}
        if set(self.grading) != set(pts):
            raise FlowCategoryError("grading must be defined exactly on the points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "grading", grading)
        pos = {p: i for i, p in enumerate(pts)}
        counts = {}
        for (i, j), n in dict(self.counts).items():
            if i not in pos or j not in pos:
                raise FlowCategoryError(f"count references unknown point ({i}, {j})")
            if pos[i] >= pos[j]:
                raise FlowCategoryError(
                    f"count ({i}, {j}) violates the order: counts live on pairs i < j"
                )
            if grading[i] - grading[j] != 1:
                raise FlowCategoryError(
                    f"count ({i}, {j}) has grading gap {grading[i] - grading[j]}, "
                    "only gap-1 pairs carry counts"
                )
            counts[(i, j)] = int(n)
        object.__setattr__(self, "counts", counts)
        if self.moduli_cardinalities is not None:
            cards = {}
            for (i, j), c in dict(self.moduli_cardinalities).items():
                c = int(c)
                if c < 0:
                    raise FlowCategoryError("moduli cardinality must be >= 0")
                if i not in pos or j not in pos or pos[i] >= pos[j]:
                    raise FlowCategoryError(f"cardinality on bad pair ({i}, {j})")
                if grading[i] - grading[j] != 1:
                    raise FlowCategoryError(f"cardinality on non-gap-1 pair ({i}, {j})")
                n = counts.get((i, j), 0)
                if abs(n) > c or (abs(n) - c) % 2 != 0:
                    raise FlowCategoryError(
                        f"count {n} incompatible with cardinality {c} on ({i}, {j})"
                    )
                cards[(i, j)] = c
            object.__setattr__(self, "moduli_cardinalities", cards)

    # -- basic queries -------------------------------------------------------

    def mu(self, p: str) -> int:
        return self.grading[p]

    def position(self, p: str) -> int:
        return self.points.index(p)

    def count(self, i: str, j: str) -> int:
        return self.counts.get((i, j), 0)

    def is_empty(self) -> bool:
        return not self.points

    def grading_range(self):
        mus = [self.grading[p] for p in self.points]
        return min(mus), max(mus)

    def points_of_degree(self, k: int):
        return [p for p in self.points if self.grading[p] == k]

    def ordered_pairs_with_gap(self, gap: int):
        out = []
        for a in range(len(self.points)):
            for b in range(a + 1, len(self.points)):
                i, j = self.points[a], self.points[b]
                if self.grading[i] - self.grading[j] == gap:
                    out.append((i, j))
        return out

    def relabeled(self, mapping: Mapping[str, str]) -> "GradedFlowCategory":
        """Order-preserving rename of the points."""
        return GradedFlowCategory(
            tuple(mapping[p] for p in self.points),
            {mapping[p]: m for p, m in self.grading.items()},
            {(mapping[i], mapping[j]): n for (i, j), n in self.counts.items()},
            None
            if self.moduli_cardinalities is None
            else {(mapping[i], mapping[j]): c for (i, j), c in self.moduli_cardinalities.items()},
        )

    def with_grading_shift(self, shift: int) -> "GradedFlowCategory":
        return GradedFlowCategory(
            self.points,
            {p: m + shift for p, m in self.grading.items()},
            dict(self.counts),
            self.moduli_cardinalities,
        )


def check_d_squared(F: GradedFlowCategory) -> list:
    """All pairs (i, k) with grading gap 2 whose signed composite sum is
    nonzero, as [((i, k), total), ...]."""
    violations = []
    for (i, k) in F.ordered_pairs_with_gap(2):
        total = 0
        for u in F.points:
            total += F.count(i, u) * F.count(u, k)
        if total != 0:
            violations.append(((i, k), total))
    return violations


def morse_complex(F: GradedFlowCategory) -> ChainComplex:
    """One generator per point in its Maslov degree; differential entry
    (row j, column i) is the signed count of lines from i to j."""
    bad = check_d_squared(F)
    if bad:
        raise DSquaredError(bad)
    if F.is_empty():
        return ChainComplex.empty()
    k_min, k_max = F.grading_range()
    by_degree = {k: F.points_of_degree(k) for k in range(k_min, k_max + 1)}
    ranks = [len(by_degree[k]) for k in range(k_min, k_max + 1)]
    labels = {k: tuple(by_degree[k]) for k in range(k_min, k_max + 1)}
    diffs = {}
    for k in range(k_min + 1, k_max + 1):
        rows, cols = by_degree[k - 1], by_degree[k]
        diffs[k] = IntegerMatrix.from_rows(
            [[F.count(i, j) for i in cols] for j in rows], cols=len(cols)
        )
    return ChainComplex.build(k_min, ranks, diffs, labels)


# ---------------------------------------------------------------------------
# Embedding dimensions and the cellular construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingDimensions:
    """Dimension bookkeeping of a coherent embedding of the category.

    ``dim_E[(i, j)]`` is the dimension of the Euclidean space the moduli
    from i to j embed into, ``dim_V[(i, j)]`` the dimension of the framing
    target space, ``xi_rank[p]`` the rank of the pointwise bundle (zero in
    the classical, untwisted case).  ``dim_E`` may be -1 on pairs with
    grading gap 0: the formal dimension of the empty sphere's ambient
    space; such pairs never carry moduli.
    """

    dim_E: Mapping[tuple, int]
    dim_V: Mapping[tuple, int]
    xi_rank: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "dim_E", dict(self.dim_E))
        object.__setattr__(self, "dim_V", dict(self.dim_V))
        object.__setattr__(self, "xi_rank", dict(self.xi_rank))

    def validate(self, F: GradedFlowCategory) -> list:
        """All broken invariants: E-additivity with the corner direction,
        V-additivity, and the normal-bundle rank balance."""
        problems = []
        pts = F.points
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                i, j = pts[a], pts[b]
                if (i, j) not in self.dim_E or (i, j) not in self.dim_V:
                    problems.append(f"missing pair ({i}, {j})")
                    continue
                if self.dim_V[(i, j)] < 0:
                    problems.append(f"dim_V({i}, {j}) < 0")
                gap = F.mu(i) - F.mu(j)
                lhs = self.xi_rank[i] + self.dim_E[(i, j)] - (gap - 1)
                rhs = self.dim_V[(i, j)] + self.xi_rank[j]
                if lhs != rhs:
                    problems.append(f"normal-bundle balance fails at ({i}, {j})")
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                for c in range(b + 1, len(pts)):
                    i, u, k = pts[a], pts[b], pts[c]
                    if self.dim_E[(i, k)] != self.dim_E[(i, u)] + 1 + self.dim_E[(u, k)]:
                        problems.append(f"E-additivity fails at ({i}, {u}, {k})")
                    if self.dim_V[(i, k)] != self.dim_V[(i, u)] + self.dim_V[(u, k)]:
                        problems.append(f"V-additivity fails at ({i}, {u}, {k})")
        return problems


def synthesize_embedding_dimensions(
    F: GradedFlowCategory, stabilization: int
) -> EmbeddingDimensions:
    """The affine-in-grading solution dim_E = K·gap - 1, dim_V = (K-1)·gap,
    xi = 0, for stabilization constant K >= 2.

    Rejects categories whose order is incompatible with the grading (some
    ordered pair with negative gap): no K keeps dim_V >= 0 there.
    """
    K = int(stabilization)
    if K < 2:
        raise FlowCategoryError(f"stabilization constant must be >= 2, got {K}")
    dim_E = {}
    dim_V = {}
    pts = F.points
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            i, j = pts[a], pts[b]
            gap = F.mu(i) - F.mu(j)
            if gap < 0:
                raise FlowCategoryError(
                    f"pair ({i}, {j}) has grading gap {gap} < 0; "
                    "dim_V would be negative for every K"
                )
            dim_E[(i, j)] = K * gap - 1
            dim_V[(i, j)] = (K - 1) * gap
    return EmbeddingDimensions(dim_E, dim_V, {p: 0 for p in pts})


def cjs_cellular_complex(
    F: GradedFlowCategory, dims: EmbeddingDimensions
) -> ChainComplex:
    """Cellular complex of the quotient construction.

    Point i contributes one cell of unstable dimension

        dim_V(min, i) + xi(i) + dim_F(i, max),
        dim_F(i, max) = dim_E(i, max) + 1 for i < max, else 0,

    and the whole complex is desuspended by dim_V(min, max) - mu(max) +
    xi(max).  The shifted cell degree must equal mu(i) for every i; the
    attaching degrees are the signed counts.  The result equals
    ``morse_complex(F)`` generator by generator.
    """
    bad = check_d_squared(F)
    if bad:
        raise DSquaredError(bad)
    if F.is_empty():
        return ChainComplex.empty()
    problems = dims.validate(F)
    if problems:
        raise FlowCategoryError(f"invalid embedding dimensions: {problems[0]}")
    pts = F.points
    pmin, pmax = pts[0], pts[-1]

    def dv(i, j):
        return 0 if i == j else dims.dim_V[(i, j)]

    shift = dv(pmin, pmax) - F.mu(pmax) + dims.xi_rank[pmax]
    cell_degree = {}
    for p in pts:
        if p == pmax:
            dim_F = 0
        else:
            dim_F = dims.dim_E[(p, pmax)] + 1
        unstable = dv(pmin, p) + dims.xi_rank[p] + dim_F
        deg = unstable - shift
        if deg != F.mu(p):
            raise CellDimensionError(
                f"cell dimension identity fails at {p}: "
                f"unstable {unstable} - shift {shift} = {deg} != mu = {F.mu(p)}"
            )
        cell_degree[p] = deg

    k_min = min(cell_degree.values())
    k_max = max(cell_degree.values())
    by_degree = {k: [p for p in pts if cell_degree[p] == k] for k in range(k_min, k_max + 1)}
    ranks = [len(by_degree[k]) for k in range(k_min, k_max + 1)]
    labels = {k: tuple(by_degree[k]) for k in range(k_min, k_max + 1)}
    diffs = {}
    for k in range(k_min + 1, k_max + 1):
        rows, cols = by_degree[k - 1], by_degree[k]
        diffs[k] = IntegerMatrix.from_rows(
            [[F.count(i, j) for i in cols] for j in rows], cols=len(cols)
        )
    return ChainComplex.build(k_min, ranks, diffs, labels)


# ---------------------------------------------------------------------------
# Random categories for property suites
# ---------------------------------------------------------------------------


def random_flow_category(rng, max_points=8, mu_range=(0, 4), count_range=(-3, 3)):
    """Random category with order-compatible grading, counts repaired to
    satisfy d² by zeroing offending factors (strictly decreasing nonzero
    count, so the repair terminates)."""
    n = rng.randint(0, max_points)
    mus = sorted((rng.randint(*mu_range) for _ in range(n)), reverse=True)
    points = tuple(f"p{i}" for i in range(n))
    grading = {p: m for p, m in zip(points, mus)}
    F = GradedFlowCategory(points, grading)
    counts = {}
    for (i, j) in F.ordered_pairs_with_gap(1):
        n_ij = rng.randint(*count_range)
        if n_ij != 0:
            counts[(i, j)] = n_ij
    while True:
        F = GradedFlowCategory(points, grading, counts)
        bad = check_d_squared(F)
        if not bad:
            return F
        (i, k), _ = bad[0]
        offenders = [
            u
            for u in points
            if F.count(i, u) * F.count(u, k) != 0
        ]
        u = offenders[rng.randrange(len(offenders))]
        if rng.random() < 0.5 and (i, u) in counts:
            del counts[(i, u)]
        else:
            counts.pop((u, k), None) or counts.pop((i, u), None)
