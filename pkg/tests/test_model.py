import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from doublecheck.errors import ConfigError, ContractError, DegenerateInputError, DimensionError, VocabularyError
from doublecheck.model import (
    AttentionWeights,
    DoubleCheckModel,
    EmbeddedSequence,
    ModelConfig,
    attention,
    classify,
    context,
    embed,
    lstm_forward,
    reweight_input,
    smooth_attention,
)
from doublecheck.numcore import Parameter, Tensor, gaussian_kernel, softmax


def small_model(seed=0, **kw):
    cfg = dict(vocab_size=11, embed_dim=4, hidden_dim=5, seq_len=9)
    cfg.update(kw)
    return DoubleCheckModel(ModelConfig(**cfg), seed=seed)


def random_ids(rng, batch, seq_len, vocab=11, min_len=1):
    ids = np.zeros((batch, seq_len), dtype=np.int64)
    for b in range(batch):
        n = int(rng.integers(min_len, seq_len + 1))
        ids[b, :n] = rng.integers(1, vocab, size=n)
    return ids


class TestConfig:
    @pytest.mark.parametrize("bad", [dict(embed_dim=0), dict(hidden_dim=0), dict(seq_len=0),
                                     dict(num_classes=3), dict(dropout_rate=1.0), dict(dropout_rate=-0.1),
                                     dict(gaussian_sigma=0.0), dict(salience_mode="half")])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            ModelConfig(vocab_size=5, **bad)

    def test_round_trip(self):
        cfg = ModelConfig(vocab_size=9, hidden_dim=7, salience_mode="no_salience")
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg

    def test_defaults(self):
        cfg = ModelConfig(vocab_size=3)
        assert (cfg.embed_dim, cfg.hidden_dim, cfg.seq_len, cfg.dropout_rate, cfg.gaussian_sigma) == \
            (300, 128, 256, 0.5, 1.0)
        assert cfg.grad_through_alpha and not cfg.smooth_second


class TestEmbed:
    def test_all_pad(self):
        table = Parameter(np.arange(12.0).reshape(4, 3))
        table.data[0] = 0
        x = embed(np.zeros(5, dtype=int), table)
        assert not x.vectors.data.any() and not x.mask.any()

    def test_lookup(self):
        table = np.arange(30.0).reshape(10, 3)
        x = embed([3, 7], table)
        assert np.array_equal(x.vectors.data, table[[3, 7]])

    def test_out_of_range(self):
        with pytest.raises(VocabularyError):
            embed([1, 10], np.zeros((10, 2)))

    def test_gradient_touches_only_used_rows(self):
        table = Parameter(np.ones((6, 2)))
        embed([[2, 4, 2, 0]], table).vectors.sum().backward()
        rows = np.flatnonzero(np.abs(table.grad).sum(axis=1))
        assert rows.tolist() == [2, 4]
        assert table.grad[2].tolist() == [2.0, 2.0]


class TestLstmForward:
    def test_shape(self, rng):
        m = small_model()
        x = embed(random_ids(rng, 2, 9), m.params["embedding"])
        h = lstm_forward(x, (m.params["lstm1.w_ih"], m.params["lstm1.w_hh"], m.params["lstm1.bias"]))
        assert h.shape == (2, 9, 5)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            lstm_forward(Tensor(rng.normal(size=(1, 3, 4))), (np.zeros((5, 8)), np.zeros((2, 8)), np.zeros(8)))

    def test_causality(self, rng):
        m = small_model(seed=2)
        p = (m.params["lstm1.w_ih"], m.params["lstm1.w_hh"], m.params["lstm1.bias"])
        ids = rng.integers(1, 11, size=(1, 9))
        base = lstm_forward(embed(ids, m.params["embedding"]), p).data
        for t in range(9):
            changed = ids.copy()
            changed[0, t] = 1 + changed[0, t] % 10
            h = lstm_forward(embed(changed, m.params["embedding"]), p).data
            assert np.array_equal(h[0, :t], base[0, :t])
            assert not np.array_equal(h[0, t], base[0, t])


class TestAttention:
    def test_zero_scorer_is_uniform(self, rng):
        h = Tensor(rng.normal(size=(1, 4, 3)))
        mask = np.array([[True, True, True, False]])
        a = attention(h, (np.eye(3), np.zeros(3), np.zeros(3)), mask)
        assert np.allclose(a.alpha.data, [[1 / 3, 1 / 3, 1 / 3, 0]], atol=1e-15)

    def test_hand_computed(self):
        # scores are tanh(h); choose h with tanh(h) = 0.5 and 0 and -0.5
        h = Tensor(np.arctanh([[[0.5], [0.0], [-0.5]]]))
        a = attention(h, (np.array([[1.0]]), np.zeros(1), np.ones(1)), np.ones((1, 3), bool))
        e = np.exp([0.5, 0.0, -0.5])
        assert np.allclose(a.scores.data, [[0.5, 0.0, -0.5]], atol=1e-15)
        assert np.allclose(a.alpha.data, [e / e.sum()], atol=1e-15)

    def test_all_masked(self, rng):
        with pytest.raises(DegenerateInputError):
            attention(Tensor(rng.normal(size=(1, 2, 3))), (np.eye(3), np.zeros(3), np.ones(3)),
                      np.zeros((1, 2), bool))

    def test_mask_shape(self, rng):
        with pytest.raises(DimensionError):
            attention(Tensor(rng.normal(size=(1, 2, 3))), (np.eye(3), np.zeros(3), np.ones(3)), np.ones((1, 3), bool))


def weights(alpha, mask=None):
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    mask = np.ones(alpha.shape, bool) if mask is None else np.atleast_2d(mask)
    return AttentionWeights(Tensor(alpha), Tensor(alpha), mask)


class TestSmoothing:
    def test_uniform_unchanged(self):
        out = smooth_attention(weights(np.full(6, 1 / 6)), 1.0)
        assert np.allclose(out.alpha.data, 1 / 6, atol=1e-15)

    def test_one_hot(self):
        alpha = np.zeros(11)
        alpha[5] = 1.0
        out = smooth_attention(weights(alpha), 1.0).alpha.data[0]
        assert np.allclose(out[2:9], gaussian_kernel(1.0), atol=1e-15)
        assert (out[2:9] > 0).all() and np.argmax(out) == 5
        assert out.sum() == pytest.approx(1.0, abs=1e-12)

    def test_padding_stays_zero(self):
        mask = np.array([True] * 4 + [False] * 3)
        alpha = np.array([0.1, 0.2, 0.3, 0.4, 0, 0, 0])
        out = smooth_attention(weights(alpha, mask), 1.0).alpha.data[0]
        assert (out[4:] == 0).all() and out.sum() == pytest.approx(1.0, abs=1e-12)

    def test_requires_prefix_mask(self):
        with pytest.raises(ContractError):
            smooth_attention(weights([0.5, 0, 0.5], [True, False, True]), 1.0)


class TestContextAndReweight:
    def test_one_hot_selects(self, rng):
        h = rng.normal(size=(1, 4, 3))
        assert np.allclose(context(Tensor([[0, 0, 1.0, 0]]), Tensor(h)).data, h[0, 2])

    def test_uniform_averages(self, rng):
        h = rng.normal(size=(1, 4, 3))
        c = context(Tensor([[1 / 3, 1 / 3, 1 / 3, 0]]), Tensor(h)).data
        assert np.allclose(c, h[0, :3].mean(axis=0), atol=1e-15)

    def test_loop_oracle(self, rng):
        alpha, h = rng.random((2, 5)), rng.normal(size=(2, 5, 3))
        want = [sum(alpha[b, i] * h[b, i] for i in range(5)) for b in range(2)]
        assert np.abs(context(Tensor(alpha), Tensor(h)).data - want).max() <= 1e-12

    def test_length_mismatch(self, rng):
        with pytest.raises(DimensionError):
            context(Tensor(np.ones((1, 3))), Tensor(np.ones((1, 4, 2))))

    def test_reweight(self, rng):
        x = EmbeddedSequence(Tensor(rng.normal(size=(1, 3, 2))), np.ones((1, 3), bool))
        out = reweight_input(x, Tensor([[0.0, 1.0, 0.5]])).vectors.data
        assert not out[0, 0].any()
        assert np.array_equal(out[0, 1], x.vectors.data[0, 1])
        assert np.allclose(out[0, 2], 0.5 * x.vectors.data[0, 2])

    def test_reweight_gradient_check(self, rng):
        from doublecheck.numcore import grad_check, mul, tanh, tensor_sum
        vec = Parameter(rng.normal(size=(1, 4, 3)))
        s = Parameter(rng.normal(size=(1, 4)))
        w = rng.normal(size=(1, 4, 3))

        def f():
            a = softmax(s)
            x = reweight_input(EmbeddedSequence(vec, np.ones((1, 4), bool)), a)
            return tensor_sum(mul(tanh(x.vectors), w)) + tensor_sum(mul(a, a))
        assert grad_check(f, [vec, s]).max_error < 1e-6


class TestClassify:
    @pytest.mark.parametrize("probs,label", [([0.7, 0.3], 0), ([0.3, 0.7], 1), ([0.5, 0.5], 0)])
    def test_examples(self, probs, label):
        assert classify(probs) == label

    def test_batched(self):
        assert classify(np.array([[0.2, 0.8], [0.5, 0.5]])).tolist() == [1, 0]


class TestForward:
    def test_probabilities_and_shapes(self, rng):
        m = small_model()
        out = m(random_ids(rng, 4, 9))
        assert out.probs.shape == (4, 2) and np.allclose(out.probs.data.sum(axis=1), 1, atol=1e-12)
        assert out.labels.shape == (4,)

    def test_unbatched(self, rng):
        m = small_model()
        ids = random_ids(rng, 1, 9)
        single, batch = m(ids[0]), m(ids)
        assert single.probs.shape == (2,) and not single.batched
        assert np.array_equal(single.probs.data, batch.probs.data[0])
        assert single.attention.alpha.shape == (9,)

    def test_wrong_length(self):
        with pytest.raises(ContractError):
            small_model()(np.ones(8, dtype=int))

    def test_train_mode_needs_rng(self, rng):
        with pytest.raises(ContractError):
            small_model()(random_ids(rng, 1, 9), train_mode=True)

    def test_eval_is_deterministic(self, rng):
        m = small_model()
        ids = random_ids(rng, 3, 9)
        assert np.array_equal(m(ids).probs.data, m(ids).probs.data)

    def test_dropout_only_in_train_mode(self, rng):
        m = small_model()
        ids = random_ids(rng, 3, 9)
        a = m(ids, train_mode=True, rng=np.random.default_rng(0)).probs.data
        b = m(ids, train_mode=True, rng=np.random.default_rng(1)).probs.data
        assert not np.array_equal(a, b)

    def test_modes_share_parameter_count(self):
        assert small_model().num_parameters() == small_model(salience_mode="no_salience").num_parameters()

    def test_seq_len_one_ablation_is_exact(self, rng):
        for seed in range(5):
            ids = rng.integers(1, 11, size=(6, 1))
            full = small_model(seed, seq_len=1)(ids)
            ablated = small_model(seed, seq_len=1, salience_mode="no_salience")(ids)
            assert np.array_equal(full.probs.data, ablated.probs.data)
            assert np.array_equal(full.attention.alpha.data, np.ones((6, 1)))

    def test_modes_differ_in_general(self, rng):
        ids = random_ids(rng, 2, 9, min_len=9)
        assert not np.array_equal(small_model(3)(ids).probs.data,
                                  small_model(3, salience_mode="no_salience")(ids).probs.data)

    def test_smooth_second_flag(self, rng):
        ids = random_ids(rng, 2, 9, min_len=9)
        m = small_model(4, smooth_second=True)
        out = m(ids)
        assert np.allclose(out.attention2.alpha.data.sum(axis=1), 1, atol=1e-12)
        assert not np.array_equal(out.probs.data, small_model(4)(ids).probs.data)

    @given(st.integers(0, 2**31 - 1))
    def test_attention_contracts(self, seed):
        rng = np.random.default_rng(seed)
        m = small_model(seed % 7)
        ids = random_ids(rng, 3, 9)
        out = m(ids)
        mask = ids != 0
        for a in (out.raw_attention, out.attention, out.attention2):
            alpha = a.alpha.data
            assert (alpha >= 0).all()
            assert np.abs(alpha.sum(axis=1) - 1).max() <= 1e-9
            assert (alpha[~mask] == 0).all()

    def test_state_dict_round_trip(self, rng):
        m = small_model(1)
        clone = m.copy()
        ids = random_ids(rng, 2, 9)
        assert np.array_equal(m(ids).probs.data, clone(ids).probs.data)
        clone.params["head.b"].data += 1
        assert not np.array_equal(m.params["head.b"].data, clone.params["head.b"].data)

    def test_padding_row_is_zero(self):
        m = small_model()
        assert not m.params["embedding"].data[0].any()

    def test_init_range(self):
        m = small_model()
        for name, p in m.params.items():
            if name.endswith("bias"):
                continue
            assert np.abs(p.data).max() <= 0.1
        bias = m.params["lstm1.bias"].data
        assert (bias[5:10] >= 0.9).all() and np.abs(np.delete(bias, range(5, 10))).max() <= 0.1

    def test_freeze_embeddings(self):
        m = small_model(freeze_embeddings=True)
        assert m.params["embedding"] not in m.parameters()


@pytest.mark.parametrize("mode", ["full", "no_salience"])
@pytest.mark.parametrize("through", [True, False])
def test_full_model_gradient(mode, through):
    from doublecheck.diagnostics import model_check
    report, where = model_check(seed=11, salience_mode=mode, grad_through_alpha=through)
    assert report.max_error < 1e-4, where


def test_stop_gradient_differs_from_full_flow(rng):
    m_full = small_model(2, grad_through_alpha=True)
    m_stop = small_model(2, grad_through_alpha=False)
    ids = random_ids(rng, 2, 9, min_len=9)
    grads = []
    for m in (m_full, m_stop):
        m.zero_grad()
        m(ids).probs[:, 0].sum().backward()
        grads.append(m.params["attn1.v"].grad.copy())
    assert not np.allclose(grads[0], grads[1], rtol=1e-6, atol=0)
