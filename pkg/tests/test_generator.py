import json
import math

import pytest

from cardsmith.corpus import Corpus
from cardsmith.errors import ConfigError
from cardsmith.generator import (
    GeneratorConfig,
    decode_card,
    encode_card,
    encode_corpus,
    load_generator,
    sample_cards,
    save_generator,
    train_generator,
)

TINY_RECORDS = (
    "Sprite Dragon|{U}{R}|Creature — Dragon|4/4|Flying, haste",
    "Giant Growth|{G}|Instant||Target creature gets +3/+3 until end of turn.",
)


def tiny_stream(max_chars: int = 200) -> str:
    stream = ("\n".join(TINY_RECORDS) + "\n") * 3
    stream = stream[:max_chars]
    return stream[: stream.rfind("\n") + 1]


def small_gen_config(**overrides):
    defaults = dict(hidden_size=64, layers=1, sequence_length=120, learning_rate=5e-3,
                    epochs=2, seed=5)
    defaults.update(overrides)
    return GeneratorConfig(**defaults)


@pytest.fixture(scope="module")
def trained_generator():
    config = small_gen_config(hidden_size=128, epochs=220)
    return train_generator(config, tiny_stream())


class TestEncoding:
    def test_empty_corpus_empty_stream(self):
        assert encode_corpus(Corpus(cards=[])) == ""

    def test_one_card_one_terminator(self, fixture_corpus):
        single = Corpus(cards=fixture_corpus.cards[:1])
        stream = encode_corpus(single)
        assert stream.count("\n") == 1
        assert stream.endswith("\n")

    def test_round_trip_on_fixture_cards(self, fixture_corpus):
        for card in fixture_corpus.cards:
            encoded = encode_card(card)
            decoded = decode_card(encoded)
            assert decoded is not None, card.name
            assert decoded.name == card.name
            pt = "/".join(card.power_toughness) if card.power_toughness else ""
            assert decoded.power_toughness == pt
            assert decoded.type_line == card.type_line

    def test_self_reference_masked(self, fixture_corpus):
        bolt = fixture_corpus.by_id()["c003"]
        encoded = encode_card(bolt)
        assert "Lightning Bolt deals" not in encoded.split("|", 1)[1]
        decoded = decode_card(encoded)
        assert "{this card} deals 3 damage" in decoded.rules_text

    def test_delimiters_escaped_in_content(self):
        from cardsmith.cards import Card, ColorIdentity, parse_type_line

        card = Card(id="x1", name="Odd|Name", mana_cost=(), type_line="Instant",
                    types=parse_type_line("Instant"), rules_text="Line one.\nLine two | with pipe.",
                    color_identity=ColorIdentity())
        encoded = encode_card(card)
        assert "\n" not in encoded
        decoded = decode_card(encoded)
        assert decoded.name == "Odd|Name"
        assert decoded.rules_text == "Line one.\nLine two | with pipe."


class TestDecode:
    def test_well_formed(self):
        decoded = decode_card(TINY_RECORDS[0])
        assert decoded.name == "Sprite Dragon"
        assert decoded.mana_cost == "{U}{R}"
        assert decoded.power_toughness == "4/4"

    def test_no_delimiters_malformed(self):
        assert decode_card("just some words with no structure") is None

    def test_wrong_field_count_malformed(self):
        assert decode_card("a|b|c") is None

    def test_bad_mana_cost_malformed(self):
        assert decode_card("Name|{2}{W|Instant||text") is None

    def test_this_card_placeholder_preserved(self):
        raw = "Owl|{W}{U}|Creature — Bird|1/2|Flying. When {this card} enters the battlefield, detain target creature an opponent controls."
        decoded = decode_card(raw)
        assert "{this card}" in decoded.rules_text


class TestTrainGenerator:
    def test_empty_stream_rejected(self):
        with pytest.raises(ConfigError):
            train_generator(small_gen_config(), "")

    def test_smoke_finite_loss(self):
        _, _, report = train_generator(small_gen_config(), tiny_stream())
        assert len(report.epochs) == 2
        assert all(math.isfinite(e.train_loss) for e in report.epochs)

    def test_memorizes_tiny_corpus(self, trained_generator):
        _, _, report = trained_generator
        assert report.epochs[-1].train_loss < 0.1

    def test_artifact_round_trip(self, trained_generator, tmp_path):
        model, chars, _ = trained_generator
        path = tmp_path / "gen.pt"
        save_generator(model, chars, path)
        loaded, loaded_chars = load_generator(path)
        assert loaded_chars == chars
        assert sample_cards(loaded, loaded_chars, 2, temperature=0.5, seed=3) == \
            sample_cards(model, chars, 2, temperature=0.5, seed=3)


class TestSampling:
    def test_count_one(self, trained_generator):
        model, chars, _ = trained_generator
        assert len(sample_cards(model, chars, 1, seed=0)) == 1

    def test_exact_count(self, trained_generator):
        model, chars, _ = trained_generator
        assert len(sample_cards(model, chars, 5, temperature=0.9, seed=1)) == 5

    def test_same_seed_identical(self, trained_generator):
        model, chars, _ = trained_generator
        a = sample_cards(model, chars, 3, temperature=0.8, seed=11)
        b = sample_cards(model, chars, 3, temperature=0.8, seed=11)
        assert a == b

    def test_near_zero_temperature_reproduces_corpus_record(self, trained_generator):
        model, chars, _ = trained_generator
        (first,) = sample_cards(model, chars, 1, temperature=1e-4, seed=0)
        assert first in TINY_RECORDS

    def test_bad_count_rejected(self, trained_generator):
        model, chars, _ = trained_generator
        with pytest.raises(ConfigError):
            sample_cards(model, chars, 0)


class TestCardBank:
    def test_bank_entries_complete(self, pipeline_artifacts):
        lines = pipeline_artifacts["bank"].read_text().splitlines()
        assert len(lines) == 30
        for i, line in enumerate(lines):
            entry = json.loads(line)
            assert entry["bank_index"] == i
            assert set(entry["color_pred"]) == {"White", "Blue", "Black", "Red", "Green", "Colorless"}
            assert set(entry["type_pred"]) == {"Creature", "Artifact", "Enchantment", "InstantSorcery", "Land"}
            assert sum(entry["color_pred"].values()) == pytest.approx(1.0, abs=1e-6)
            assert sum(entry["type_pred"].values()) == pytest.approx(1.0, abs=1e-6)
            assert entry["malformed"] == (entry["decoded"] is None)

    def test_manifest_records_provenance(self, pipeline_artifacts):
        manifest = json.loads(
            pipeline_artifacts["bank"].with_suffix(".jsonl.manifest.json").read_text())
        assert manifest["count"] == 30
        assert manifest["generator_seed"] == 4
        assert 0.0 <= manifest["malformed_rate"] <= 1.0
        assert len(manifest["color_model_sha256"]) == 64

    def test_rebuild_is_byte_identical(self, pipeline_artifacts, tmp_path):
        from cardsmith.generator import build_card_bank

        again = tmp_path / "bank2.jsonl"
        build_card_bank(pipeline_artifacts["generator"], 30, pipeline_artifacts["color_model"],
                        pipeline_artifacts["type_model"], again, temperature=0.7, seed=4)
        assert again.read_bytes() == pipeline_artifacts["bank"].read_bytes()

    def test_label_set_mismatch_rejected(self, pipeline_artifacts, tmp_path):
        from cardsmith.errors import LabelSetError
        from cardsmith.generator import build_card_bank

        with pytest.raises(LabelSetError):
            build_card_bank(pipeline_artifacts["generator"], 2, pipeline_artifacts["type_model"],
                            pipeline_artifacts["type_model"], tmp_path / "bad.jsonl")
