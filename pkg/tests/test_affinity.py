import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import central_difference, rel_err
from hierclass.affinity import (
    AffinityConfig,
    AffinityMatrix,
    AffinityRecord,
    DistanceMatrix,
    EncoderConfig,
    affinity_from_json,
    affinity_to_json,
    build_affinity_artifacts,
    build_affinity_matrix,
    distance_to_csv,
    final_score,
    fine_tune,
    make_decoder,
    make_encoder,
    raw_transfer_score,
    symmetrize_to_distance,
    train_autoencoder,
)
from hierclass.errors import DataError
from hierclass.nets import (
    SgdConfig,
    flatten_params,
    mlp_params,
    reconstruction_grads,
    reconstruction_loss,
    train_reconstruction,
    unflatten_params,
)
from hierclass.synth import LabeledDataset, PlantedSpec, generate_planted
from hierclass.treespace import Catalog, internal, leaf

LINEAR_CFG = AffinityConfig(
    encoder=EncoderConfig(hidden_dim=8, latent_dim=2,
                          hidden_activation="identity", latent_activation="identity"),
    pretrain=SgdConfig(epochs=300, batch_size=16, learning_rate=0.05),
)


def test_autoencoder_recovers_linear_subspace():
    rng = np.random.default_rng(0)
    basis = rng.normal(size=(2, 6))
    data = rng.normal(size=(100, 2)) @ basis
    _, _, loss = train_autoencoder(data, LINEAR_CFG, seed=0)
    assert loss < 1e-3


def test_autoencoder_on_all_zero_data_is_lossless():
    cfg = replace(LINEAR_CFG, encoder=replace(LINEAR_CFG.encoder, hidden_activation="relu"))
    _, _, loss = train_autoencoder(np.zeros((20, 6)), cfg, seed=0)
    assert loss == 0.0


def test_autoencoder_rejects_empty_or_mismatched_data():
    with pytest.raises(ValueError):
        train_autoencoder(np.zeros((0, 4)), AffinityConfig(), seed=0)
    with pytest.raises(ValueError):
        make_encoder(3, EncoderConfig(latent_dim=5), np.random.default_rng(0))


def test_autoencoder_objective_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    cfg = EncoderConfig(hidden_dim=5, latent_dim=2)
    enc = make_encoder(6, cfg, rng)
    dec = make_decoder(6, cfg, rng)
    x = rng.normal(size=(10, 6))
    params = mlp_params(enc) + mlp_params(dec)
    acts = [l.activation for l in enc.layers] + [l.activation for l in dec.layers]
    _, grads = reconstruction_grads(params, acts, x)

    def f(vec):
        loss, _ = reconstruction_grads(unflatten_params(vec, params), acts, x)
        return loss

    assert rel_err(flatten_params(grads), central_difference(f, flatten_params(params))) < 1e-6


def test_training_loss_never_increases_net_across_seeds():
    rng = np.random.default_rng(1)
    data = rng.normal(size=(120, 8)) + 3.0
    cfg = AffinityConfig()
    for seed in range(5):
        enc = make_encoder(8, cfg.encoder, np.random.default_rng([seed, 0]))
        dec = make_decoder(8, cfg.encoder, np.random.default_rng([seed, 0]))
        _, _, history = train_reconstruction(
            enc, dec, data, cfg.pretrain, np.random.default_rng([seed, 1])
        )
        assert history[-1] <= history[0]


# --- fine-tuning -------------------------------------------------------------


def test_fine_tune_budget_exceeds_pool():
    cfg = AffinityConfig()
    enc = make_encoder(4, cfg.encoder, np.random.default_rng(0))
    data = np.random.default_rng(1).normal(size=(20, 4))
    with pytest.raises(ValueError, match="budget"):
        fine_tune(enc, data, 17, cfg, seed=0)  # pool is 16 after 20% holdout


def test_fine_tune_zero_budget_keeps_encoder():
    cfg = AffinityConfig()
    enc = make_encoder(4, cfg.encoder, np.random.default_rng(0))
    data = np.random.default_rng(1).normal(size=(30, 4))
    tuned, l_ft = fine_tune(enc, data, 0, cfg, seed=0)
    assert tuned is enc
    assert l_ft >= 0.0


def test_fine_tune_is_deterministic_in_seed():
    cfg = AffinityConfig()
    enc = make_encoder(4, cfg.encoder, np.random.default_rng(0))
    data = np.random.default_rng(1).normal(size=(40, 4))
    _, a = fine_tune(enc, data, 10, cfg, seed=5)
    _, b = fine_tune(enc, data, 10, cfg, seed=5)
    assert a == b


def test_self_transfer_dominates_on_planted_data():
    cat = Catalog(("A", "B", "C"))
    tree = internal([internal([leaf(0), leaf(1)]), leaf(2)])
    spec = PlantedSpec(cat, tree, 10, 150, (9.0, 3.0), 2.0)
    data = generate_planted(spec, seed=0)
    cfg = AffinityConfig(seed=0)
    encoders = {c: train_autoencoder(data.of_concept(c), cfg, seed=100 + c)[0] for c in range(3)}
    for target in range(3):
        losses = {
            src: fine_tune(encoders[src], data.of_concept(target), 80, cfg, seed=500 + target)[1]
            for src in range(3)
        }
        assert min(losses, key=losses.get) == target


def test_fresh_encoder_fine_tune_matches_autoencoder_regime():
    # with no warmup and a pretraining-length joint phase, fine-tuning a fresh
    # encoder is the same procedure as training an autoencoder on the pool
    from hierclass.affinity import _holdout_split

    cat = Catalog(("A", "B", "C"))
    tree = internal([internal([leaf(0), leaf(1)]), leaf(2)])
    data = generate_planted(PlantedSpec(cat, tree, 10, 150, (9.0, 3.0), 2.0), seed=4)
    x = data.of_concept(0)
    cfg = AffinityConfig(
        warmup=SgdConfig(epochs=0, batch_size=32, learning_rate=0.1),
        finetune=SgdConfig(epochs=60, batch_size=32, learning_rate=0.1),
    )
    pool_size = x.shape[0] - max(1, round(0.2 * x.shape[0]))
    fresh = make_encoder(10, cfg.encoder, np.random.default_rng([9, 3]))
    _, l_ft = fine_tune(fresh, x, pool_size, cfg, seed=9)
    pool, held = _holdout_split(x.shape[0], 0.2, np.random.default_rng([9, 0]))
    enc, dec, _ = train_autoencoder(x[pool], cfg, seed=77)
    l_ae = reconstruction_loss(enc, dec, x[held])
    assert abs(l_ft - l_ae) / l_ae < 0.15


def test_identical_distribution_target_matches_own_loss():
    rng = np.random.default_rng(12)
    base = rng.normal(size=10) * 3
    sample_a = base + rng.normal(size=(200, 10))
    sample_b = base + rng.normal(size=(200, 10))
    cfg = AffinityConfig(seed=5)
    encoder, _, own_loss = train_autoencoder(sample_a, cfg, seed=5)
    _, l_ft = fine_tune(encoder, sample_b, 80, cfg, seed=6)
    assert abs(l_ft - own_loss) / own_loss < 0.10


# --- scores ------------------------------------------------------------------


def test_raw_transfer_score_examples():
    assert raw_transfer_score(1.0, 1.0) == 0.5
    assert raw_transfer_score(0.0, 2.0) == 1.0
    assert raw_transfer_score(3.0, 1.0) == 0.25


def test_raw_transfer_score_errors():
    with pytest.raises(ValueError):
        raw_transfer_score(-0.1, 1.0)
    with pytest.raises(ValueError):
        raw_transfer_score(0.5, 0.0)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.0, 100.0, allow_nan=False),
    st.floats(1e-4, 100.0, allow_nan=False),  # separation resolvable in float64
    st.floats(0.01, 100.0, allow_nan=False),
)
def test_raw_transfer_score_strictly_monotone(l1, delta, l_ref):
    p1 = raw_transfer_score(l1, l_ref)
    p2 = raw_transfer_score(l1 + delta, l_ref)
    assert p1 > p2
    assert 0.0 <= p2 <= p1 <= 1.0
    assert raw_transfer_score(l1, l_ref) == p1


def test_final_score_examples():
    assert final_score(0.8, 40, 100, 0.5, 0.5) == pytest.approx(0.6)
    assert final_score(1.0, 100, 100, 0.5, 0.5) == 1.0
    assert final_score(0.37, 55, 100, 1.0, 0.0) == 0.37  # beta 0: budget ignored


def test_final_score_errors():
    with pytest.raises(ValueError):
        final_score(0.5, 1, 0, 0.5, 0.5)  # b_max 0 with b > 0
    with pytest.raises(ValueError):
        final_score(0.5, 5, 4, 0.5, 0.5)
    with pytest.raises(ValueError):
        final_score(0.5, 1, 2, 0.0, 0.0)
    assert final_score(0.5, 0, 0, 0.5, 0.5) == 0.25  # b_max 0, b 0: budget term 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.integers(0, 50), st.floats(0.1, 2), st.floats(0.1, 2))
def test_final_score_affine_and_bounded(p, b, alpha, beta):
    s = final_score(p, b, 50, alpha, beta)
    assert 0.0 <= s <= 1.0
    # affine in p: slope alpha/(alpha+beta)
    s2 = final_score(min(1.0, p + 0.1), b, 50, alpha, beta)
    if p + 0.1 <= 1.0:
        assert s2 - s == pytest.approx(0.1 * alpha / (alpha + beta))


# --- matrix construction -----------------------------------------------------


@pytest.fixture(scope="module")
def triple_artifacts(triple_data_module):
    return build_affinity_artifacts(triple_data_module, AffinityConfig(seed=3))


@pytest.fixture(scope="module")
def triple_data_module():
    cat = Catalog(("c1", "c2", "c3"))
    tree = internal([internal([leaf(0), leaf(1)]), leaf(2)])
    spec = PlantedSpec(cat, tree, 10, 150, (9.0, 3.0), 2.0)
    return generate_planted(spec, seed=3)


def test_matrix_has_all_ordered_pairs(triple_artifacts):
    matrix = triple_artifacts.matrix
    assert len(matrix.records) == 3 * 2
    assert not matrix.missing_pairs()
    assert not matrix.skipped


def test_overlapping_pair_scores_dominate_remote(triple_artifacts):
    matrix = triple_artifacts.matrix
    close = min(matrix.score(0, 1), matrix.score(1, 0))
    remote = max(
        matrix.score(i, j)
        for i, j in [(0, 2), (2, 0), (1, 2), (2, 1)]
    )
    assert close > remote


def test_identical_distribution_pair_beats_half():
    rng = np.random.default_rng(12)
    base = rng.normal(size=8) * 3
    feats = base + rng.normal(size=(400, 8))
    labels = np.array([0] * 200 + [1] * 200)
    data = LabeledDataset(feats, labels, Catalog(("u", "v")))
    matrix = build_affinity_matrix(data, AffinityConfig(seed=2))
    assert matrix.score(0, 1) > 0.5
    assert matrix.score(1, 0) > 0.5


def test_matrix_build_is_deterministic_and_thread_invariant(triple_data_module):
    serial = build_affinity_matrix(triple_data_module, AffinityConfig(seed=9))
    again = build_affinity_matrix(triple_data_module, AffinityConfig(seed=9))
    threaded = build_affinity_matrix(triple_data_module, AffinityConfig(seed=9, n_threads=3))
    assert serial == again == threaded


def test_insufficient_concepts_are_skipped_and_reported():
    rng = np.random.default_rng(0)
    feats = np.vstack([rng.normal(size=(40, 5)), rng.normal(size=(40, 5)) + 4, rng.normal(size=(3, 5))])
    labels = np.array([0] * 40 + [1] * 40 + [2] * 3)
    data = LabeledDataset(feats, labels, Catalog(("a", "b", "tiny")))
    matrix = build_affinity_matrix(data, AffinityConfig(seed=0, min_examples=10))
    assert matrix.skipped == ((2, 3),)
    assert set(matrix.missing_pairs()) == {(0, 2), (2, 0), (1, 2), (2, 1)}


def test_fewer_than_two_usable_concepts_is_an_error():
    rng = np.random.default_rng(0)
    data = LabeledDataset(
        np.vstack([rng.normal(size=(40, 5)), rng.normal(size=(3, 5))]),
        np.array([0] * 40 + [1] * 3),
        Catalog(("a", "tiny")),
    )
    with pytest.raises(DataError, match="at least 2"):
        build_affinity_matrix(data, AffinityConfig(seed=0, min_examples=10))


# --- symmetrization ----------------------------------------------------------


def _matrix_from_scores(scores: dict) -> AffinityMatrix:
    k = max(max(i, j) for i, j in scores) + 1
    return AffinityMatrix(
        catalog=Catalog(tuple(f"c{i}" for i in range(k))),
        alpha=0.5,
        beta=0.5,
        b_max=100,
        seed=0,
        records=tuple(
            AffinityRecord(source=i, target=j, p=s, budget=10, score=s)
            for (i, j), s in scores.items()
        ),
    )


def test_symmetrize_examples():
    m = _matrix_from_scores({(0, 1): 1.0, (1, 0): 1.0})
    assert symmetrize_to_distance(m).values[0, 1] == 0.0
    m = _matrix_from_scores({(0, 1): 0.8, (1, 0): 0.6})
    assert symmetrize_to_distance(m).values[0, 1] == pytest.approx(0.3)
    assert symmetrize_to_distance(m, method="min").values[0, 1] == pytest.approx(0.4)
    assert symmetrize_to_distance(m, method="max").values[0, 1] == pytest.approx(0.2)


def test_symmetrize_missing_pairs_named():
    m = _matrix_from_scores({(0, 1): 0.8, (1, 0): 0.6, (0, 2): 0.5, (2, 0): 0.5, (1, 2): 0.4})
    with pytest.raises(DataError, match="c2->c1"):
        symmetrize_to_distance(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_symmetrize_output_is_valid_distance_matrix(k, seed):
    rng = np.random.default_rng(seed)
    scores = {}
    for i in range(k):
        for j in range(k):
            if i != j:
                scores[(i, j)] = float(rng.uniform(0, 1))
    dm = symmetrize_to_distance(_matrix_from_scores(scores))
    assert np.allclose(dm.values, dm.values.T)
    assert np.all(np.diag(dm.values) == 0)
    assert dm.values.min() >= 0 and dm.values.max() <= 1


def test_distance_matrix_validation():
    cat = Catalog(("a", "b"))
    with pytest.raises(ValueError):
        DistanceMatrix(cat, np.array([[0.0, 0.5], [0.4, 0.0]]))  # asymmetric
    with pytest.raises(ValueError):
        DistanceMatrix(cat, np.array([[0.1, 0.5], [0.5, 0.0]]))  # nonzero diagonal
    with pytest.raises(ValueError):
        DistanceMatrix(cat, np.array([[0.0, 1.5], [1.5, 0.0]]))  # out of range


def test_budget_annotations(triple_artifacts):
    dm = symmetrize_to_distance(triple_artifacts.matrix)
    assert dm.budgets is not None and len(dm.budgets) == 3
    assert all(b > 0 for b in dm.budgets)


# --- wire formats ------------------------------------------------------------


def test_affinity_json_roundtrip(triple_artifacts):
    obj = json.loads(json.dumps(affinity_to_json(triple_artifacts.matrix)))
    assert affinity_from_json(obj) == triple_artifacts.matrix


def test_affinity_json_has_documented_keys(triple_artifacts):
    obj = affinity_to_json(triple_artifacts.matrix)
    assert set(obj) >= {"concepts", "alpha", "beta", "b_max", "seed", "entries"}
    assert set(obj["entries"][0]) == {"src", "dst", "p", "b", "s"}


def test_distance_csv_layout(triple_artifacts):
    text = distance_to_csv(symmetrize_to_distance(triple_artifacts.matrix))
    lines = text.strip().split("\n")
    assert lines[0] == ",c1,c2,c3"
    assert len(lines) == 4
    assert lines[1].split(",")[1] == "0.0"
