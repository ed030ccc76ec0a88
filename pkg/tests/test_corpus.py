import json

import pytest
from django.core.exceptions import ValidationError

from corpus.exceptions import SplitSizeError, SubsampleSizeError
from corpus.loaders import QADataset, dump_sl, load_sl, sl_to_qa
from corpus.sampling import (
    PUBLISHED_SPLIT_SIZES,
    PUBLISHED_TEST_SIZES,
    available_fractions,
    sample_all_splits,
    sample_split,
    split_family,
    split_size,
    subsample_qa,
)
from corpus.squad import emit_squad_json, parse_squad_json
from corpus.synthetic import make_generic_qa, make_restaurant_dataset, make_sized_dataset


@pytest.fixture(scope="module")
def sized_datasets():
    return {family: make_sized_dataset(family) for family in PUBLISHED_SPLIT_SIZES}


class TestLoadSL:
    """Native SL JSON loading and validation."""

    def test_load_bus_dialog(self, bus_dataset):
        assert bus_dataset.name == "buses_dialog"
        assert len(bus_dataset) == 3
        assert bus_dataset.ontology.slot_names == ("date", "from_location", "to_location")
        assert bus_dataset.violations() == []

    def test_dump_load_round_trip(self, bus_dataset):
        assert load_sl(dump_sl(bus_dataset)) == bus_dataset

    def test_invalid_json_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"slots": {},\n "turns": [}', encoding="utf-8")
        with pytest.raises(ValidationError) as exc:
            load_sl(path)
        assert "line 2" in exc.value.messages[0]

    def test_offset_mismatch_names_turn(self, tmp_path, bus_path):
        data = json.loads(bus_path.read_text(encoding="utf-8"))
        data["turns"][0]["labels"][0]["start"] = 29
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ValidationError) as exc:
            load_sl(path)
        assert any("bus-1" in m for m in exc.value.messages), "Violation should name the turn"

    def test_missing_field_has_location(self):
        with pytest.raises(ValidationError) as exc:
            load_sl({"slots": {"date": ["What date?"]}, "turns": [{"turn_id": "t1"}]})
        assert "turns[0].user_text" in exc.value.messages[0]

    def test_duplicate_turn_ids(self):
        turn = {"turn_id": "t1", "user_text": "hi"}
        with pytest.raises(ValidationError):
            load_sl({"slots": {"date": ["What date?"]}, "turns": [turn, turn]})


class TestSplits:
    """Few-shot split sizes and nesting."""

    @pytest.mark.parametrize("family", sorted(PUBLISHED_SPLIT_SIZES))
    def test_published_sizes(self, family, sized_datasets):
        """Full-size datasets reproduce the published split table exactly."""
        splits = sample_all_splits(sized_datasets[family], seed=0)
        sizes = {label: len(split) for label, split in splits.items()}
        assert sizes == PUBLISHED_SPLIT_SIZES[family]

    @pytest.mark.parametrize("family", sorted(PUBLISHED_TEST_SIZES))
    def test_test_set_sizes(self, family):
        test = make_sized_dataset(family, split="test")
        assert len(test) == PUBLISHED_TEST_SIZES[family]
        assert test.name == f"{family}_test"
        assert {t.turn_id for t in test.turns}.isdisjoint(t.turn_id for t in make_sized_dataset(family).turns)

    def test_unknown_sized_split(self):
        with pytest.raises(ValueError):
            make_sized_dataset("dstc8_homes", split="dev")

    def test_restaurants_sizes(self, sized_datasets):
        sizes = [len(s) for s in sample_all_splits(sized_datasets["restaurants8k"]).values()]
        assert sizes == [64, 128, 256, 512, 1024, 2049, 4099, 8198]

    @pytest.mark.parametrize("family", ["restaurants8k", "dstc8_homes"])
    def test_splits_are_nested(self, family, sized_datasets):
        splits = list(sample_all_splits(sized_datasets[family], seed=3).values())
        for smaller, larger in zip(splits, splits[1:]):
            small_ids = {t.turn_id for t in smaller.turns}
            large_ids = {t.turn_id for t in larger.turns}
            assert small_ids <= large_ids

    def test_split_keeps_original_order(self, sized_datasets):
        ds = sized_datasets["dstc8_buses"]
        split = sample_split(ds, "1/8", seed=1)
        order = {t.turn_id: i for i, t in enumerate(ds.turns)}
        positions = [order[t.turn_id] for t in split.turns]
        assert positions == sorted(positions)

    def test_seed_determinism(self, sized_datasets):
        ds = sized_datasets["dstc8_events"]
        assert sample_split(ds, "1/16", seed=7) == sample_split(ds, "1/16", seed=7)
        assert sample_split(ds, "1/16", seed=7) != sample_split(ds, "1/16", seed=8)

    def test_full_fraction_returns_dataset(self, bus_dataset):
        assert sample_split(bus_dataset, "1") is bus_dataset

    def test_unknown_family_uses_floor(self):
        ds = make_restaurant_dataset(100, seed=0, name="custom")
        assert split_family(ds.name) is None
        assert len(sample_split(ds, "1/8")) == 12
        assert len(sample_split(ds, "1/128")) == 1
        assert available_fractions(ds)[0] == "1/128"

    def test_family_names(self):
        assert split_family("DSTC8-Homes") == "dstc8_homes"
        assert split_family("restaurants8k_train") == "restaurants8k"
        assert split_family("movies") is None

    def test_invalid_fractions(self):
        for bad in ("3/2", "0", "-1/4", "abc"):
            with pytest.raises(SplitSizeError):
                split_size(100, bad)

    def test_unpublished_family_fraction(self):
        """DSTC8 tables start at 1/32."""
        with pytest.raises(SplitSizeError):
            split_size(1133, "1/64", "dstc8_buses")


class TestSquadFormat:
    """SQuAD2.0 emit / parse."""

    def _mixed(self, bus_dataset):
        generic = make_generic_qa(30, seed=2, unanswerable_fraction=0.4)
        return QADataset(tuple(sl_to_qa(bus_dataset).examples) + generic.examples, name="mixed")

    def test_round_trip_is_byte_stable(self, bus_dataset):
        qa = self._mixed(bus_dataset)
        assert any(ex.is_impossible for ex in qa) and any(not ex.is_impossible for ex in qa)
        first = emit_squad_json(qa)
        parsed = parse_squad_json(first, name="mixed")
        assert parsed.examples == qa.examples
        assert emit_squad_json(parsed) == first

    def test_document_layout(self, bus_dataset):
        doc = json.loads(emit_squad_json(sl_to_qa(bus_dataset)))
        assert doc["version"] == "v2.0"
        assert [article["title"] for article in doc["data"]] == ["bus-1", "bus-2", "bus-3"]
        qas = doc["data"][0]["paragraphs"][0]["qas"]
        assert len(qas) == 3
        assert qas[0]["answers"] == [] and qas[0]["is_impossible"] is True
        assert qas[2]["answers"] == [{"text": "Sacramento", "answer_start": 30}]

    def test_missing_is_impossible_inferred(self):
        doc = {"data": [{"title": "a", "paragraphs": [{"context": "hello", "qas": [
            {"id": "q1", "question": "Who?", "answers": []},
        ]}]}]}
        qa = parse_squad_json(json.dumps(doc))
        assert qa.examples[0].is_impossible

    def test_bad_answer_has_location(self):
        doc = {"data": [{"title": "a", "paragraphs": [{"context": "hello", "qas": [
            {"id": "q1", "question": "Who?", "is_impossible": False, "answers": [{"text": "bye", "answer_start": 0}]},
        ]}]}]}
        with pytest.raises(ValidationError) as exc:
            parse_squad_json(json.dumps(doc))
        assert "data[0].paragraphs[0].qas[0]" in exc.value.messages[0]


class TestSubsample:
    def test_size_and_order(self):
        qa = make_generic_qa(200, seed=0)
        sample = subsample_qa(qa, 50, seed=4)
        assert len(sample) == 50
        order = {ex.qid: i for i, ex in enumerate(qa.examples)}
        positions = [order[ex.qid] for ex in sample.examples]
        assert positions == sorted(positions)
        assert subsample_qa(qa, 50, seed=4) == sample

    def test_too_many(self):
        qa = make_generic_qa(10, seed=0)
        with pytest.raises(SubsampleSizeError):
            subsample_qa(qa, 11)
