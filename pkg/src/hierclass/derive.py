"""Hierarchy derivation: agglomerative clustering over concept distances
followed by a threshold collapse into a multi-way hierarchy.

Cluster distances are maintained with the Lance-Williams recurrence
d_k(ij) = a_i d_ki + a_j d_kj + b d_ij + g |d_ki - d_kj|; presets cover
single, complete, and (size-weighted) average linkage. Merges at fusion
distance >= tau are dissolved, splicing their children upward, which turns
the binary dendrogram into the final hierarchy: with tau = 0 everything
dissolves into flat classification, with tau above the largest fusion the
binary shape survives untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .affinity import AffinityMatrix, DistanceMatrix, affinity_to_json, symmetrize_to_distance
from .serialize import sha256_of_json
from .treespace import Catalog, Tree, canonicalize, internal, leaf

PRESETS = ("single", "complete", "average", "custom")


@dataclass(frozen=True)
class LinkageParams:
    """Lance-Williams coefficients, either a preset or explicit custom values.

    These coefficients are unrelated to the alpha/beta score weights of the
    affinity stage.
    """

    preset: str = "average"
    alpha_i: float | None = None
    alpha_j: float | None = None
    beta: float | None = None
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.preset not in PRESETS:
            raise ValueError(f"unknown linkage preset {self.preset!r}")
        custom = (self.alpha_i, self.alpha_j, self.beta, self.gamma)
        if self.preset == "custom" and any(v is None for v in custom):
            raise ValueError("custom linkage requires alpha_i, alpha_j, beta, gamma")

    def coefficients(self, n_i: int, n_j: int, n_k: int) -> tuple[float, float, float, float]:
        if self.preset == "single":
            return 0.5, 0.5, 0.0, -0.5
        if self.preset == "complete":
            return 0.5, 0.5, 0.0, 0.5
        if self.preset == "average":
            total = n_i + n_j
            return n_i / total, n_j / total, 0.0, 0.0
        return self.alpha_i, self.alpha_j, self.beta, self.gamma


def lw_update(
    d_ki: float,
    d_kj: float,
    d_ij: float,
    n_i: int,
    n_j: int,
    n_k: int,
    params: LinkageParams,
) -> float:
    """Distance from cluster k to the fusion of i and j."""
    if min(d_ki, d_kj, d_ij) < 0:
        raise ValueError("distances are nonnegative")
    a_i, a_j, b, g = params.coefficients(n_i, n_j, n_k)
    return a_i * d_ki + a_j * d_kj + b * d_ij + g * abs(d_ki - d_kj)


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    distance: float
    new_id: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class Dendrogram:
    n_leaves: int
    steps: tuple[MergeStep, ...]

    def __post_init__(self) -> None:
        if self.n_leaves < 1:
            raise ValueError("need at least one leaf")
        if len(self.steps) != self.n_leaves - 1:
            raise ValueError(f"expected {self.n_leaves - 1} merge steps, got {len(self.steps)}")
        for step in self.steps:
            if step.distance < 0:
                raise ValueError("fusion distances are nonnegative")
        if self.steps:
            root_members = self.steps[-1].members
            if sorted(root_members) != list(range(self.n_leaves)):
                raise ValueError("final merge must cover every leaf exactly once")


def agglomerate(dm: DistanceMatrix, params: LinkageParams) -> Dendrogram:
    """Successive fusions of the closest pair, distances updated in place.

    Tie-breaking on equal minimal distance: the pair with the smaller
    combined supervision budget wins (when the matrix carries budget
    annotations), then the lexicographically smaller id pair. Deterministic.
    """
    k = len(dm.catalog)
    members: dict[int, tuple[int, ...]] = {i: (i,) for i in range(k)}
    sizes: dict[int, int] = {i: 1 for i in range(k)}
    budgets: dict[int, int] = {
        i: (dm.budgets[i] if dm.budgets is not None else 0) for i in range(k)
    }
    dist: dict[tuple[int, int], float] = {}
    for i in range(k):
        for j in range(i + 1, k):
            dist[(i, j)] = float(dm.values[i, j])

    steps = []
    active = list(range(k))
    for step_no in range(k - 1):
        best = None
        for a_pos in range(len(active)):
            for b_pos in range(a_pos + 1, len(active)):
                i, j = active[a_pos], active[b_pos]
                key = (budgets[i] + budgets[j], i, j)
                d = dist[(i, j)]
                if best is None or d < best[0] or (d == best[0] and key < best[1]):
                    best = (d, key)
        d_ij, (_, i, j) = best
        new_id = k + step_no
        merged = tuple(sorted(members[i] + members[j]))
        steps.append(MergeStep(left=i, right=j, distance=d_ij, new_id=new_id, members=merged))
        active = [c for c in active if c not in (i, j)]
        for c in active:
            d_new = lw_update(
                dist[_ordered(c, i)],
                dist[_ordered(c, j)],
                d_ij,
                sizes[i],
                sizes[j],
                sizes[c],
                params,
            )
            dist[_ordered(c, new_id)] = d_new
        members[new_id] = merged
        sizes[new_id] = sizes[i] + sizes[j]
        budgets[new_id] = budgets[i] + budgets[j]
        active.append(new_id)
    return Dendrogram(n_leaves=k, steps=tuple(steps))


def _ordered(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def collapse_threshold(dgm: Dendrogram, tau: float) -> Tree:
    """Dissolve every merge with fusion distance >= tau, splicing its
    children into the parent's child list; returns the canonical tree."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if dgm.n_leaves == 1:
        return leaf(0)
    children_of = {s.new_id: (s.left, s.right) for s in dgm.steps}
    distance_of = {s.new_id: s.distance for s in dgm.steps}

    def build(cid: int) -> list[Tree]:
        if cid < dgm.n_leaves:
            return [leaf(cid)]
        left, right = children_of[cid]
        kids = build(left) + build(right)
        if distance_of[cid] >= tau:
            return kids
        return [internal(kids)]

    roots = build(dgm.steps[-1].new_id)
    tree = roots[0] if len(roots) == 1 else internal(roots)
    return canonicalize(tree)


@dataclass(frozen=True)
class DerivedHierarchy:
    tree: Tree
    dendrogram: Dendrogram
    provenance: dict = field(compare=False)


def derive_hierarchy(
    matrix: AffinityMatrix,
    params: LinkageParams,
    tau: float = 0.5,
    budget_tiebreak: bool = True,
    symmetrization: str = "mean",
) -> DerivedHierarchy:
    """Symmetrize the affinity matrix, agglomerate, collapse at tau."""
    dm = symmetrize_to_distance(matrix, method=symmetrization)
    if not budget_tiebreak:
        dm = DistanceMatrix(catalog=dm.catalog, values=dm.values, budgets=None)
    dgm = agglomerate(dm, params)
    tree = collapse_threshold(dgm, tau)
    provenance = {
        "affinity_sha256": sha256_of_json(affinity_to_json(matrix)),
        "linkage": params.preset,
        "linkage_coefficients": None
        if params.preset != "custom"
        else [params.alpha_i, params.alpha_j, params.beta, params.gamma],
        "tau": tau,
        "symmetrization": symmetrization,
        "budget_tiebreak": budget_tiebreak,
    }
    return DerivedHierarchy(tree=tree, dendrogram=dgm, provenance=provenance)


# ---------------------------------------------------------------------------
# wire formats


def dendrogram_to_json(dgm: Dendrogram, catalog: Catalog) -> dict:
    return {
        "concepts": list(catalog.names),
        "steps": [
            {
                "left": s.left,
                "right": s.right,
                "distance": s.distance,
                "id": s.new_id,
                "members": list(s.members),
            }
            for s in dgm.steps
        ],
    }


def dendrogram_from_json(obj: dict) -> tuple[Dendrogram, Catalog]:
    catalog = Catalog(tuple(obj["concepts"]))
    steps = tuple(
        MergeStep(
            left=int(s["left"]),
            right=int(s["right"]),
            distance=float(s["distance"]),
            new_id=int(s["id"]),
            members=tuple(int(m) for m in s["members"]),
        )
        for s in obj["steps"]
    )
    return Dendrogram(n_leaves=len(catalog), steps=steps), catalog


def dendrogram_to_dot(dgm: Dendrogram, catalog: Catalog) -> str:
    """GraphViz rendering: leaves labeled by concept, merges by distance."""
    lines = ["digraph dendrogram {", "  rankdir=BT;"]
    for cid, name in enumerate(catalog.names):
        lines.append(f'  n{cid} [label="{name}", shape=box];')
    for s in dgm.steps:
        lines.append(f'  n{s.new_id} [label="d={s.distance:.4g}"];')
        lines.append(f"  n{s.left} -> n{s.new_id};")
        lines.append(f"  n{s.right} -> n{s.new_id};")
    lines.append("}")
    return "\n".join(lines) + "\n"
