import math

import pytest

from cardsmith.errors import ConfigError
from cardsmith.text_model import TextCNNConfig, load_text_model, predict_text, save_text_model, train_text
from cardsmith.textenc import TextSample, build_text_vocab, encode_text

from conftest import marker_texts


@pytest.fixture(scope="module")
def tiny_text_setup():
    texts, labels = marker_texts(60, seed=1)
    vocab = build_text_vocab(texts, min_count=1)
    samples = [TextSample(encode_text(t, vocab, 24), lab, f"t{i:04d}")
               for i, (t, lab) in enumerate(zip(texts, labels))]
    config = TextCNNConfig(label_set="type", vocab_size=len(vocab), max_len=24,
                           epochs=2, batch_size=16, seed=4)
    return vocab, samples, config


@pytest.fixture(scope="module")
def trained_text(tiny_text_setup):
    vocab, samples, config = tiny_text_setup
    model, report = train_text(config, samples[:50], samples[50:])
    return vocab, model, report


class TestTrainText:
    def test_smoke_finite_report(self, trained_text):
        _, _, report = trained_text
        assert len(report.epochs) == 2
        assert all(math.isfinite(e.train_loss) for e in report.epochs)

    def test_empty_training_set_rejected(self, tiny_text_setup):
        vocab, samples, config = tiny_text_setup
        with pytest.raises(ConfigError):
            train_text(config, [], samples[:5])

    def test_vocab_config_mismatch_rejected(self, tiny_text_setup):
        vocab, samples, config = tiny_text_setup
        bad = TextCNNConfig(label_set="type", vocab_size=3, max_len=24, epochs=1, seed=0)
        with pytest.raises(ConfigError):
            train_text(bad, samples[:10], samples[10:15])

    def test_seed_reproducibility(self, tiny_text_setup):
        vocab, samples, config = tiny_text_setup
        _, first = train_text(config, samples[:30], samples[30:40])
        _, second = train_text(config, samples[:30], samples[30:40])
        assert first.deterministic_fields() == second.deterministic_fields()


class TestPredictText:
    def test_softmax_contract_any_text(self, trained_text):
        vocab, model, _ = trained_text
        for text in ("", "complete gibberish zzz", "destroy target dragon", "{2}{w} flying"):
            vector = predict_text(model, vocab, text)
            assert sum(vector.scores) == pytest.approx(1.0, abs=1e-6)
            assert all(s >= 0 for s in vector.scores)
            assert len(vector.labels) == 5

    def test_deterministic(self, trained_text):
        vocab, model, _ = trained_text
        a = predict_text(model, vocab, "target wizard gets +2/+2")
        b = predict_text(model, vocab, "target wizard gets +2/+2")
        assert a == b

    def test_truncation_stability(self, trained_text):
        # Texts identical in their first max_len tokens give identical vectors.
        vocab, model, _ = trained_text
        base = "destroy target dragon " * 10  # > 24 tokens
        extended = base + "and then some completely different suffix material"
        assert predict_text(model, vocab, base) == predict_text(model, vocab, extended)

    def test_token_order_sensitivity(self, trained_text):
        # Same bag of words, different order: convolution over sequences must
        # be able to tell them apart.
        vocab, model, _ = trained_text
        a = predict_text(model, vocab, "destroy target dragon draw a card")
        b = predict_text(model, vocab, "draw target dragon destroy a card")
        assert a != b


class TestTextArtifact:
    def test_round_trip_preserves_outputs(self, trained_text, tmp_path):
        vocab, model, _ = trained_text
        path = tmp_path / "text.pt"
        save_text_model(model, vocab, path)
        loaded_model, loaded_vocab = load_text_model(path)
        assert loaded_vocab.tokens == vocab.tokens
        for text in ("sacrifice a zombie", "elf tokens you control"):
            assert predict_text(model, vocab, text) == predict_text(loaded_model, loaded_vocab, text)

    def test_config_snapshot_embedded(self, trained_text, tmp_path):
        from cardsmith.artifacts import load_artifact

        vocab, model, _ = trained_text
        path = tmp_path / "text.pt"
        save_text_model(model, vocab, path)
        payload = load_artifact(path, expected_kind="text")
        assert payload["config"]["label_set"] == "type"
        assert payload["config"]["vocab_size"] == len(vocab)
