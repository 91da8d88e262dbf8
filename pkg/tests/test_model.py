"""Classifier assembly, forward/backward, ablations, and checkpoints."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from singledet.embeddings import EmbeddingTable
from singledet.features import EncodedExample
from singledet.model import (
    CheckpointError,
    ModelConfig,
    SingletonModel,
    build_model,
    load_model,
    parameter_count,
    save_model,
)
from singledet.nn import Adam, Rng, gradient_check

# Table-2 defaults give this many trainable scalars; the closed form is
# re-derived term by term in test_parameter_count_closed_form.
DEFAULT_PARAM_COUNT = 354_666


def small_config(**overrides):
    base = dict(
        embed_dim=6,
        max_mention_len=5,
        context_len=5,
        filter_widths=(2, 3),
        filters_per_width=3,
        cnn_dense_out=4,
        syntactic_hidden=(5, 4),
        final_hidden=(6, 3),
        dropout_rate=0.2,
        seed=0,
    )
    base.update(overrides)
    return ModelConfig(**base)


def small_table(n_words=12, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable.from_mapping(
        {f"w{i}": rng.standard_normal(dim).tolist() for i in range(n_words)}
    )


def rand_example(rng, cfg, vocab_size, label=None):
    return EncodedExample(
        mention_ids=tuple(int(v) for v in rng.integers(0, vocab_size + 1, cfg.max_mention_len)),
        context_ids=tuple(int(v) for v in rng.integers(0, vocab_size + 1, cfg.context_len)),
        syntactic=tuple(int(v) for v in rng.integers(0, 2, 3)),
        label=int(rng.integers(0, 2)) if label is None else label,
    )


@pytest.fixture
def small_model():
    return build_model(small_config(), small_table())


class TestModelConfig:
    def test_defaults_are_valid(self):
        cfg = ModelConfig()
        assert cfg.filter_widths == (2, 3, 4)
        assert cfg.final_hidden == (32, 8)

    def test_only_two_classes(self):
        with pytest.raises(ValueError, match="2-way"):
            ModelConfig(classes=3)

    def test_filter_width_bounded_by_input_length(self):
        with pytest.raises(ValueError, match="filter width"):
            ModelConfig(filter_widths=(2, 11))

    def test_syntactic_branch_must_match_cnn_width(self):
        with pytest.raises(ValueError, match="syntactic branch"):
            ModelConfig(syntactic_hidden=(32, 8))

    def test_some_branch_required(self):
        with pytest.raises(ValueError, match="branch"):
            ModelConfig(use_words=False, use_context=False, use_syntactic=False)

    def test_dropout_range(self):
        with pytest.raises(ValueError, match="dropout"):
            ModelConfig(dropout_rate=1.0)


class TestParameterCount:
    def test_default_total_frozen(self):
        assert parameter_count(ModelConfig()) == DEFAULT_PARAM_COUNT

    def test_parameter_count_closed_form(self):
        # per CNN branch: conv k in {2,3,4} of 64 filters over 300 dims,
        # then dense 192->16; syntactic 3->32->16; head 48->32->8->2
        branch = sum(k * 300 * 64 + 64 for k in (2, 3, 4)) + (192 * 16 + 16)
        syn = (3 * 32 + 32) + (32 * 16 + 16)
        head = (48 * 32 + 32) + (32 * 8 + 8) + (8 * 2 + 2)
        assert 2 * branch + syn + head == DEFAULT_PARAM_COUNT

    def test_allocation_matches_closed_form(self, small_model):
        assert small_model.num_parameters() == parameter_count(small_model.config)


class TestBuild:
    def test_same_seed_identical_bytes(self):
        a = build_model(small_config(), small_table())
        b = build_model(small_config(), small_table())
        assert set(a.params) == set(b.params)
        for name in a.params:
            assert a.params[name].value.tobytes() == b.params[name].value.tobytes()

    def test_different_seed_differs(self):
        a = build_model(small_config(seed=0), small_table())
        b = build_model(small_config(seed=1), small_table())
        assert any(
            a.params[n].value.tobytes() != b.params[n].value.tobytes() for n in a.params
        )

    def test_table_dim_mismatch(self):
        with pytest.raises(ValueError, match="dim"):
            build_model(small_config(), small_table(dim=7))

    def test_biases_start_at_zero(self, small_model):
        for name, p in small_model.params.items():
            if name.endswith(".b") or name.endswith(".bias"):
                assert not p.value.any()

    def test_shape_trace(self, small_model):
        cfg = small_model.config
        assert small_model.params["word.conv2.filters"].shape == (2, cfg.embed_dim, 3)
        assert small_model.params["word.dense.w"].shape == (6, 4)
        assert small_model.params["head.h0.w"].shape == (12, 6)
        assert small_model.params["head.out.w"].shape == (3, 2)


class TestForward:
    def test_valid_distribution(self, small_model):
        rng = np.random.default_rng(1)
        for _ in range(25):
            ex = rand_example(rng, small_model.config, small_model.table.vocab_size)
            probs = small_model.forward(ex)
            assert probs.shape == (2,)
            assert (probs > 0).all() and (probs < 1).all()
            assert_allclose(probs.sum(), 1.0, atol=1e-12)

    def test_all_oov_examples_share_one_output(self, small_model):
        cfg = small_model.config
        a = EncodedExample((0,) * 5, (0,) * 5, (0, 0, 0), 0)
        b = EncodedExample((0,) * 5, (0,) * 5, (0, 0, 0), 1)
        assert_allclose(small_model.forward(a), small_model.forward(b))

    def test_deterministic_at_eval(self, small_model):
        ex = rand_example(np.random.default_rng(2), small_model.config, 12)
        assert_allclose(small_model.forward(ex), small_model.forward(ex))

    def test_dropout_draws_are_seeded(self, small_model):
        ex = rand_example(np.random.default_rng(3), small_model.config, 12)
        a = small_model.forward(ex, training=True, rng=Rng(7))
        b = small_model.forward(ex, training=True, rng=Rng(7))
        c = small_model.forward(ex, training=True, rng=Rng(8))
        assert_allclose(a, b)
        assert not np.allclose(a, c)

    def test_wrong_shape_rejected(self, small_model):
        ex = EncodedExample((0,) * 4, (0,) * 5, (0, 0, 0), 0)
        with pytest.raises(ValueError, match="mention_ids"):
            small_model.forward(ex)

    def test_out_of_vocab_id_rejected(self, small_model):
        ex = EncodedExample((99,) + (0,) * 4, (0,) * 5, (0, 0, 0), 0)
        with pytest.raises(ValueError, match="token id"):
            small_model.forward(ex)


class TestPredict:
    def test_argmax(self, small_model):
        rng = np.random.default_rng(4)
        for _ in range(20):
            ex = rand_example(rng, small_model.config, 12)
            probs = small_model.forward(ex)
            assert small_model.predict(ex) == int(np.argmax(probs))

    def test_exact_tie_goes_to_class_zero(self, small_model):
        for p in small_model.params.values():
            p.value[...] = 0.0
        ex = rand_example(np.random.default_rng(5), small_model.config, 12)
        assert_allclose(small_model.forward(ex), [0.5, 0.5])
        assert small_model.predict(ex) == 0

    def test_logit_shift_leaves_prediction_fixed(self, small_model):
        rng = np.random.default_rng(6)
        examples = [rand_example(rng, small_model.config, 12) for _ in range(10)]
        before = [small_model.predict(ex) for ex in examples]
        small_model.params["head.out.b"].value += 13.5
        after = [small_model.predict(ex) for ex in examples]
        assert before == after


class TestAblations:
    @pytest.mark.parametrize("disabled", ["use_words", "use_context", "use_syntactic"])
    def test_disabled_branch_equals_zeroed_branch(self, disabled):
        prefix = {"use_words": "word", "use_context": "context", "use_syntactic": "syn"}[disabled]
        table = small_table()
        full = build_model(small_config(), table)
        ablated = build_model(small_config(**{disabled: False}), table)
        # zero out the branch in the full model; shared parameters are
        # identical because allocation order and seed match
        for name, p in full.params.items():
            if name.startswith(prefix + "."):
                p.value[...] = 0.0
        rng = np.random.default_rng(7)
        for _ in range(10):
            ex = rand_example(rng, full.config, table.vocab_size)
            assert_allclose(ablated.forward(ex), full.forward(ex), atol=1e-15)

    def test_single_branch_model_runs(self):
        table = small_table()
        model = build_model(small_config(use_words=False, use_context=False), table)
        ex = rand_example(np.random.default_rng(8), model.config, table.vocab_size)
        assert_allclose(model.forward(ex).sum(), 1.0)


class TestGradients:
    def test_full_model_gradient_check(self, small_model):
        # mean loss over 5 random examples, dropout off; the documented
        # full-model tolerance is 1e-4.  Examples avoid padding-only conv
        # windows and all-zero flags: those sit exactly on the ReLU kink,
        # where the subgradient-0 convention and central differences
        # legitimately disagree.
        rng = np.random.default_rng(9)
        cfg = small_model.config
        examples = []
        for _ in range(5):
            flags = tuple(int(v) for v in rng.integers(0, 2, 3))
            if not any(flags):
                flags = (1, 0, 0)
            examples.append(
                EncodedExample(
                    mention_ids=tuple(int(v) for v in rng.integers(1, 13, cfg.max_mention_len)),
                    context_ids=tuple(int(v) for v in rng.integers(1, 13, cfg.context_len)),
                    syntactic=flags,
                    label=int(rng.integers(0, 2)),
                )
            )

        def loss():
            small_model.zero_grads()
            total = 0.0
            for ex in examples:
                total += small_model.accumulate_loss_gradient(
                    ex, scale=1.0 / len(examples), training=False
                )[0]
            return total / len(examples)

        assert gradient_check(loss, small_model.parameters()) < 1e-4
        assert any(np.abs(p.grad).max() > 0 for p in small_model.parameters())

    def test_gradient_scale_is_linear(self, small_model):
        ex = rand_example(np.random.default_rng(10), small_model.config, 12)
        small_model.zero_grads()
        small_model.accumulate_loss_gradient(ex, scale=1.0, training=False)
        g1 = {n: p.grad.copy() for n, p in small_model.params.items()}
        small_model.zero_grads()
        small_model.accumulate_loss_gradient(ex, scale=0.25, training=False)
        for n, p in small_model.params.items():
            assert_allclose(p.grad, 0.25 * g1[n], atol=1e-15)

    def test_loss_decreases_under_adam(self, small_model):
        ex = rand_example(np.random.default_rng(11), small_model.config, 12, label=1)
        opt = Adam(lr=0.01)
        first = None
        for _ in range(30):
            small_model.zero_grads()
            loss, _ = small_model.accumulate_loss_gradient(ex, training=False)
            if first is None:
                first = loss
            opt.step(small_model.parameters())
        assert loss < first

    def test_embeddings_receive_no_gradient(self, small_model):
        # the table matrix is read-only; training touching it would raise,
        # and its bytes must be unchanged after backward passes
        before = small_model.table.matrix.tobytes()
        ex = rand_example(np.random.default_rng(12), small_model.config, 12)
        small_model.zero_grads()
        small_model.accumulate_loss_gradient(ex, training=False)
        assert small_model.table.matrix.tobytes() == before


class TestCheckpoint:
    def test_round_trip_preserves_outputs(self, small_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(small_model, path)
        again = load_model(path, small_model.table)
        assert again.config == small_model.config
        rng = np.random.default_rng(13)
        for _ in range(30):
            ex = rand_example(rng, small_model.config, 12)
            assert_allclose(again.forward(ex), small_model.forward(ex), atol=0)

    def test_round_trip_is_bitwise(self, small_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(small_model, path)
        again = load_model(path, small_model.table)
        for name, p in small_model.params.items():
            assert again.params[name].value.tobytes() == p.value.tobytes()

    def test_wrong_table_dim(self, small_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(small_model, path)
        with pytest.raises(CheckpointError, match="dim"):
            load_model(path, small_table(dim=7))

    def test_corrupted_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CheckpointError, match="unreadable"):
            load_model(path, small_table())

    def test_wrong_format_tag(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format": "something-else"}', encoding="utf-8")
        with pytest.raises(CheckpointError, match="not a"):
            load_model(path, small_table())

    def test_version_mismatch(self, small_model, tmp_path):
        import json

        path = tmp_path / "model.json"
        save_model(small_model, path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        payload["version"] = 99
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(CheckpointError, match="version"):
            load_model(path, small_model.table)

    def test_missing_parameter(self, small_model, tmp_path):
        import json

        path = tmp_path / "model.json"
        save_model(small_model, path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        del payload["params"]["head.out.w"]
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(CheckpointError, match="names"):
            load_model(path, small_model.table)
