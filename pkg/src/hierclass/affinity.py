"""Transfer-based affinity between concepts.

For each concept an autoencoder learns a compressed representation; the
encoder is then fine-tuned toward every other concept with a fresh decoder
under a supervision budget. How well that transfer reconstructs held-out
target data, relative to a from-scratch baseline trained under the same
budget and schedule, is the raw similarity score p. The final score blends
p with the normalized budget; symmetrized complements of the scores feed
hierarchy derivation as distances.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .nets import (
    Mlp,
    SgdConfig,
    init_mlp,
    reconstruction_loss,
    task_seed,
    train_reconstruction,
)
from .synth import LabeledDataset
from .treespace import Catalog

SYMMETRIZATIONS = ("mean", "min", "max")


@dataclass(frozen=True)
class EncoderConfig:
    """Reference architecture: input -> hidden (rectifier) -> bounded latent,
    linear decoder back.

    The bounded (sigmoid) latent is what localizes a representation: far from
    the region an encoder was trained on, its latent saturates and stops
    carrying variation, so reconstruction-based transfer degrades with
    concept distance instead of being rank-blind.
    """

    hidden_dim: int = 16
    latent_dim: int = 4
    hidden_activation: str = "relu"
    latent_activation: str = "sigmoid"


@dataclass(frozen=True)
class AffinityConfig:
    """Settings for the whole affinity stage.

    ``warmup`` trains the fresh decoder alone (encoder frozen) before the
    joint ``finetune`` phase; without it, early gradients from a random
    decoder scramble the source representation and the transfer signal with
    it. ``freeze_encoder`` skips the joint phase entirely.
    """

    encoder: EncoderConfig = EncoderConfig(hidden_dim=24)
    pretrain: SgdConfig = SgdConfig(epochs=60, batch_size=32, learning_rate=0.1)
    warmup: SgdConfig = SgdConfig(epochs=80, batch_size=16, learning_rate=0.1)
    finetune: SgdConfig = SgdConfig(epochs=3, batch_size=16, learning_rate=0.02)
    budget: int = 80
    b_max: int = 100
    alpha: float = 0.5
    beta: float = 0.5
    holdout_fraction: float = 0.2
    min_examples: int = 10
    symmetrization: str = "mean"
    freeze_encoder: bool = False
    seed: int = 0
    n_threads: int = 1

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("need alpha, beta >= 0 with alpha + beta > 0")
        if not 0 < self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must be in (0, 1)")
        if self.budget < 0 or self.b_max < 0 or self.budget > self.b_max:
            raise ValueError("need 0 <= budget <= b_max")
        if self.symmetrization not in SYMMETRIZATIONS:
            raise ValueError(f"unknown symmetrization {self.symmetrization!r}")


def make_encoder(input_dim: int, cfg: EncoderConfig, rng) -> Mlp:
    if cfg.latent_dim > input_dim:
        raise ValueError(
            f"latent dim {cfg.latent_dim} exceeds input dim {input_dim}; encoders compress"
        )
    return init_mlp(
        (input_dim, cfg.hidden_dim, cfg.latent_dim),
        (cfg.hidden_activation, cfg.latent_activation),
        rng,
    )


def make_decoder(input_dim: int, cfg: EncoderConfig, rng) -> Mlp:
    return init_mlp((cfg.latent_dim, input_dim), ("identity",), rng)


def train_autoencoder(
    data: np.ndarray, cfg: AffinityConfig, seed: int
) -> tuple[Mlp, Mlp, float]:
    """Train encoder/decoder on one concept's examples; deterministic in seed.

    Returns the trained pair plus the final held-in mean reconstruction loss.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("need a nonempty (N, dim) example matrix")
    init_rng = np.random.default_rng([seed, 0])
    encoder = make_encoder(data.shape[1], cfg.encoder, init_rng)
    decoder = make_decoder(data.shape[1], cfg.encoder, init_rng)
    encoder, decoder, history = train_reconstruction(
        encoder, decoder, data, cfg.pretrain, np.random.default_rng([seed, 1])
    )
    return encoder, decoder, history[-1]


def _holdout_split(n: int, fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """(pool, heldout) index split; at least one row on each side when n > 1."""
    order = rng.permutation(n)
    n_held = max(1, int(round(fraction * n))) if n > 1 else 0
    n_held = min(n_held, n - 1) if n > 1 else 0
    return order[n_held:], order[:n_held]


def fine_tune(
    encoder: Mlp,
    target_data: np.ndarray,
    budget: int,
    cfg: AffinityConfig,
    seed: int,
) -> tuple[Mlp, float]:
    """Fine-tune a copy of the encoder toward a target concept.

    A fresh decoder is first trained alone (warmup), then jointly with a
    copy of the encoder, on exactly ``budget`` target examples drawn from
    the non-held-out pool; the returned loss is measured on the held-out
    slice. With budget 0 the encoder is left untouched and only the fresh
    decoder is trained (on the pool), scoring the source representation
    as-is. All randomness (slices, decoder init, batch schedule) derives
    from ``seed`` alone, so runs toward the same target are directly
    comparable.
    """
    target_data = np.asarray(target_data, dtype=float)
    if target_data.ndim != 2 or target_data.shape[0] < 2:
        raise ValueError("need at least 2 target examples (one is held out)")
    if target_data.shape[1] != encoder.input_dim:
        raise ValueError("target feature dim does not match the encoder")
    pool, heldout = _holdout_split(
        target_data.shape[0], cfg.holdout_fraction, np.random.default_rng([seed, 0])
    )
    if budget > pool.size:
        raise ValueError(
            f"budget {budget} exceeds the {pool.size} target examples available "
            f"after holding out {heldout.size}"
        )
    decoder = make_decoder(encoder.input_dim, cfg.encoder, np.random.default_rng([seed, 1]))
    train_rng = np.random.default_rng([seed, 2])
    rows = target_data[pool] if budget == 0 else target_data[pool[:budget]]
    _, decoder, _ = train_reconstruction(
        encoder, decoder, rows, cfg.warmup, train_rng, update_encoder=False
    )
    encoder_out = encoder
    if budget > 0 and not cfg.freeze_encoder and cfg.finetune.epochs > 0:
        encoder_out, decoder, _ = train_reconstruction(
            encoder, decoder, rows, cfg.finetune, train_rng, update_encoder=True
        )
    l_ft = reconstruction_loss(encoder_out, decoder, target_data[heldout])
    return encoder_out, l_ft


def scratch_reference(
    target_data: np.ndarray, budget: int, cfg: AffinityConfig, seed: int
) -> float:
    """Held-out loss of a freshly initialized encoder under the same budget,
    slices, decoder init, and batch schedule as :func:`fine_tune`."""
    target_data = np.asarray(target_data, dtype=float)
    fresh = make_encoder(target_data.shape[1], cfg.encoder, np.random.default_rng([seed, 3]))
    _, l_ref = fine_tune(fresh, target_data, budget, cfg, seed)
    return l_ref


def raw_transfer_score(l_ft: float, l_ref: float) -> float:
    """Map reconstruction losses to p in [0, 1]: l_ref / (l_ref + l_ft).

    Monotone decreasing in l_ft; 0.5 exactly when transfer matches scratch.
    """
    if l_ft < 0 or l_ref < 0:
        raise ValueError("losses are nonnegative")
    if l_ref <= 0:
        raise ValueError("reference loss must be positive")
    return l_ref / (l_ref + l_ft)


def final_score(p: float, budget: int, b_max: int, alpha: float, beta: float) -> float:
    """Budget-weighted similarity (alpha*p + beta*(b/b_max)) / (alpha+beta)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if alpha + beta <= 0:
        raise ValueError("alpha + beta must be positive")
    if budget < 0 or budget > b_max:
        if b_max == 0 and budget > 0:
            raise ValueError("b_max is 0 but budget is positive")
        raise ValueError(f"budget {budget} outside [0, {b_max}]")
    b_norm = budget / b_max if b_max > 0 else 0.0
    return (alpha * p + beta * b_norm) / (alpha + beta)


@dataclass(frozen=True)
class AffinityRecord:
    source: int
    target: int
    p: float
    budget: int
    score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.score <= 1.0):
            raise ValueError("p and score must lie in [0, 1]")
        if self.budget < 0:
            raise ValueError("budget is nonnegative")


@dataclass(frozen=True)
class AffinityMatrix:
    """All ordered-pair records plus the configuration snapshot."""

    catalog: Catalog
    alpha: float
    beta: float
    b_max: int
    seed: int
    records: tuple[AffinityRecord, ...]
    skipped: tuple[tuple[int, int], ...] = ()  # (concept id, example count)
    encoder: EncoderConfig | None = None

    def __post_init__(self) -> None:
        keys = [(r.source, r.target) for r in self.records]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (source, target) records")
        for r in self.records:
            if r.source == r.target:
                raise ValueError("diagonal entries are undefined")

    def _index(self) -> dict[tuple[int, int], AffinityRecord]:
        return {(r.source, r.target): r for r in self.records}

    def score(self, source: int, target: int) -> float:
        return self._index()[(source, target)].score

    def missing_pairs(self) -> list[tuple[int, int]]:
        have = {(r.source, r.target) for r in self.records}
        k = len(self.catalog)
        return [(i, j) for i in range(k) for j in range(k) if i != j and (i, j) not in have]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric [0,1] distances, zero diagonal.

    Singleton cluster sizes are implicitly one per concept; agglomeration
    tracks merged sizes itself. ``budgets`` optionally annotates each concept
    with the total supervision spent toward it, for merge tie-breaking.
    """

    catalog: Catalog
    values: np.ndarray
    budgets: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        k = len(self.catalog)
        if vals.shape != (k, k):
            raise ValueError(f"expected a {k}x{k} matrix")
        if not np.isfinite(vals).all():
            raise ValueError("non-finite distances")
        if (vals < 0).any() or (vals > 1).any():
            raise ValueError("distances must lie in [0, 1]")
        if not np.allclose(vals, vals.T, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        if np.abs(np.diag(vals)).max() > 0:
            raise ValueError("diagonal must be zero")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.budgets is not None and len(self.budgets) != k:
            raise ValueError("need one budget annotation per concept")


@dataclass(frozen=True)
class AffinityArtifacts:
    """Everything the affinity stage learned, for reuse downstream."""

    matrix: AffinityMatrix
    concept_encoders: dict[int, Mlp]
    pair_encoders: dict[tuple[int, int], Mlp]
    config: AffinityConfig
    input_dim: int


def build_affinity_artifacts(dataset: LabeledDataset, cfg: AffinityConfig) -> AffinityArtifacts:
    """Run the full affinity analysis over every ordered concept pair.

    Concepts with fewer than ``cfg.min_examples`` examples are skipped and
    reported; their pairs are left missing. Pair tasks are independent and
    fan out over ``cfg.n_threads`` threads, with per-task seeds derived from
    (seed, source, target) so the result does not depend on thread count.
    """
    catalog = dataset.catalog
    support = dataset.support()
    usable = [cid for cid in catalog.ids if support[cid] >= max(2, cfg.min_examples)]
    skipped = tuple((cid, support[cid]) for cid in catalog.ids if cid not in usable)
    if len(usable) < 2:
        raise DataError(
            f"need at least 2 concepts with >= {cfg.min_examples} examples; "
            f"skipped {[(catalog.name_of(c), n) for c, n in skipped]}"
        )

    per_concept = {cid: dataset.of_concept(cid) for cid in usable}

    def pretrain(cid: int) -> tuple[int, Mlp]:
        encoder, _, _ = train_autoencoder(per_concept[cid], cfg, seed=task_seed(cfg.seed, 1, cid))
        return cid, encoder

    def target_seed(cid: int) -> int:
        # shared by every fine-tune toward cid: same slices and schedule
        return task_seed(cfg.seed, 2, cid)

    def actual_budget(cid: int) -> int:
        pool = per_concept[cid].shape[0] - max(
            1, int(round(cfg.holdout_fraction * per_concept[cid].shape[0]))
        )
        return min(cfg.budget, pool)

    def reference(cid: int) -> tuple[int, float]:
        return cid, scratch_reference(per_concept[cid], actual_budget(cid), cfg, target_seed(cid))

    def transfer(pair: tuple[int, int]) -> tuple[tuple[int, int], Mlp, float]:
        src, dst = pair
        tuned, l_ft = fine_tune(
            encoders[src], per_concept[dst], actual_budget(dst), cfg, target_seed(dst)
        )
        return pair, tuned, l_ft

    pairs = [(i, j) for i in usable for j in usable if i != j]
    if cfg.n_threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_threads) as pool:
            encoders = dict(pool.map(pretrain, usable))
            refs = dict(pool.map(reference, usable))
            transfers = list(pool.map(transfer, pairs))
    else:
        encoders = dict(map(pretrain, usable))
        refs = dict(map(reference, usable))
        transfers = list(map(transfer, pairs))

    records = []
    pair_encoders = {}
    for (src, dst), tuned, l_ft in transfers:
        pair_encoders[(src, dst)] = tuned
        b = actual_budget(dst)
        p = raw_transfer_score(l_ft, refs[dst])
        records.append(
            AffinityRecord(
                source=src,
                target=dst,
                p=p,
                budget=b,
                score=final_score(p, b, cfg.b_max, cfg.alpha, cfg.beta),
            )
        )
    matrix = AffinityMatrix(
        catalog=catalog,
        alpha=cfg.alpha,
        beta=cfg.beta,
        b_max=cfg.b_max,
        seed=cfg.seed,
        records=tuple(records),
        skipped=skipped,
        encoder=cfg.encoder,
    )
    return AffinityArtifacts(
        matrix=matrix,
        concept_encoders=encoders,
        pair_encoders=pair_encoders,
        config=cfg,
        input_dim=dataset.n_features,
    )


def build_affinity_matrix(dataset: LabeledDataset, cfg: AffinityConfig) -> AffinityMatrix:
    return build_affinity_artifacts(dataset, cfg).matrix


def symmetrize_to_distance(matrix: AffinityMatrix, method: str = "mean") -> DistanceMatrix:
    """d(i,j) = 1 - combine(s(i->j), s(j->i)); combine is mean by default."""
    if method not in SYMMETRIZATIONS:
        raise ValueError(f"unknown symmetrization {method!r}")
    missing = matrix.missing_pairs()
    if missing:
        names = ", ".join(
            f"{matrix.catalog.name_of(i)}->{matrix.catalog.name_of(j)}" for i, j in missing
        )
        raise DataError(f"affinity matrix is missing pairs: {names}")
    k = len(matrix.catalog)
    index = matrix._index()
    combine = {"mean": lambda a, b: (a + b) / 2.0, "min": min, "max": max}[method]
    values = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d = 1.0 - combine(index[(i, j)].score, index[(j, i)].score)
            values[i, j] = values[j, i] = d
    budgets = tuple(
        sum(r.budget for r in matrix.records if r.target == cid) for cid in range(k)
    )
    return DistanceMatrix(catalog=matrix.catalog, values=values, budgets=budgets)


# ---------------------------------------------------------------------------
# wire formats


def affinity_to_json(matrix: AffinityMatrix) -> dict:
    return {
        "concepts": list(matrix.catalog.names),
        "alpha": matrix.alpha,
        "beta": matrix.beta,
        "b_max": matrix.b_max,
        "seed": matrix.seed,
        "entries": [
            {"src": r.source, "dst": r.target, "p": r.p, "b": r.budget, "s": r.score}
            for r in matrix.records
        ],
        "skipped": [{"concept": cid, "examples": n} for cid, n in matrix.skipped],
        "encoder": None
        if matrix.encoder is None
        else {
            "hidden_dim": matrix.encoder.hidden_dim,
            "latent_dim": matrix.encoder.latent_dim,
            "hidden_activation": matrix.encoder.hidden_activation,
            "latent_activation": matrix.encoder.latent_activation,
        },
    }


def affinity_from_json(obj: dict) -> AffinityMatrix:
    try:
        return AffinityMatrix(
            catalog=Catalog(tuple(obj["concepts"])),
            alpha=float(obj["alpha"]),
            beta=float(obj["beta"]),
            b_max=int(obj["b_max"]),
            seed=int(obj["seed"]),
            records=tuple(
                AffinityRecord(
                    source=int(e["src"]),
                    target=int(e["dst"]),
                    p=float(e["p"]),
                    budget=int(e["b"]),
                    score=float(e["s"]),
                )
                for e in obj["entries"]
            ),
            skipped=tuple((int(s["concept"]), int(s["examples"])) for s in obj.get("skipped", [])),
            encoder=None
            if obj.get("encoder") is None
            else EncoderConfig(
                hidden_dim=int(obj["encoder"]["hidden_dim"]),
                latent_dim=int(obj["encoder"]["latent_dim"]),
                hidden_activation=obj["encoder"]["hidden_activation"],
                latent_activation=obj["encoder"]["latent_activation"],
            ),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"bad affinity JSON: {exc}") from None


def distance_to_csv(dm: DistanceMatrix) -> str:
    lines = ["," + ",".join(dm.catalog.names)]
    for i, name in enumerate(dm.catalog.names):
        lines.append(name + "," + ",".join(repr(float(v)) for v in dm.values[i]))
    return "\n".join(lines) + "\n"
