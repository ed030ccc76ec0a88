import pytest
from django.core.exceptions import ValidationError

from corpus.loaders import SLDataset, dump_sl
from corpus.synthetic import AUDIT_PLANTED_COUNTS, RESTAURANT_ONTOLOGY
from corpus.types import DialogTurn, SlotOntology, SpanLabel
from scoring.audit import (
    DEFAULT_RULES,
    RULES,
    audit,
    find_ambiguous_numeric,
    find_inconsistencies,
    find_leading_function_words,
    find_people_nouns,
    find_pm_variants,
    find_slot_pair_ambiguity,
    render_findings,
    resolve_rules,
)


def _turn(turn_id, text, slot=None, value=None, **kwargs):
    labels = ()
    if slot is not None:
        start = text.index(value)
        labels = (SpanLabel(slot, start, start + len(value), value),)
    return DialogTurn(turn_id, text, gold_labels=labels, **kwargs)


def _dataset(*turns, ontology=RESTAURANT_ONTOLOGY):
    return SLDataset(ontology, turns, name="audit_case")


class TestPlantedFixture:
    """The bundled fixture plants a known number of each issue."""

    def test_counts_per_rule(self, audit_dataset):
        report = audit(audit_dataset)
        assert report.rules == DEFAULT_RULES
        assert report.counts == AUDIT_PLANTED_COUNTS
        assert len(report) == sum(AUDIT_PLANTED_COUNTS.values())

    def test_flagged_turns(self, audit_dataset):
        report = audit(audit_dataset)
        by_rule = {}
        for finding in report.findings:
            by_rule.setdefault(finding.rule, []).append(finding.turn_id)
        assert by_rule["pm-variants"] == ["pm-1", "pm-2", "pm-3", "pm-4", "pm-5"]
        assert by_rule["leading-function-word"] == ["prep-1", "prep-2", "prep-3"]
        assert by_rule["people-noun"] == ["people-1", "people-2", "people-3"]
        assert all(turn_id.startswith("bare-") for turn_id in by_rule["ambiguous-numeric"])
        assert not any(f.turn_id.startswith("clean-") for f in report.findings)

    def test_evidence(self, audit_dataset):
        findings = {(f.rule, f.turn_id): f for f in audit(audit_dataset).findings}
        assert findings[("pm-variants", "pm-5")].evidence == "7"
        assert findings[("pm-variants", "pm-5")].reason.startswith("marker-outside-span")
        assert findings[("pm-variants", "pm-3")].reason.startswith("dotted")
        assert findings[("people-noun", "people-3")].evidence == "3"
        assert findings[("leading-function-word", "prep-1")].evidence == "on friday"
        assert findings[("ambiguous-numeric", "bare-000")].slot is None

    def test_dataset_untouched(self, audit_dataset):
        before = dump_sl(audit_dataset)
        audit(audit_dataset, "all")
        assert dump_sl(audit_dataset) == before

    def test_deterministic(self, audit_dataset):
        assert audit(audit_dataset).to_dict() == audit(audit_dataset).to_dict()

    def test_rule_toggles(self, audit_dataset):
        report = audit(audit_dataset, "pm-variants")
        assert report.counts == {"pm-variants": 5}
        assert {f.rule for f in report.findings} == {"pm-variants"}

    def test_inconsistencies_only(self, audit_dataset):
        findings = find_inconsistencies(audit_dataset)
        assert len(findings) == 11
        assert not any(f.rule == "ambiguous-numeric" for f in findings)
        assert find_inconsistencies(audit_dataset, "ambiguous-numeric") == []

    def test_report_serialisation(self, audit_dataset):
        data = audit(audit_dataset, "all").to_dict()
        assert data["rules"] == list(RULES)
        assert data["counts"]["slot-pair-ambiguity"] == 0
        assert data["total"] == 97
        assert data["rule_versions"]["pm-variants"] == 1
        assert data["findings"][0]["severity"] == "ambiguity"

    def test_render(self, audit_dataset):
        text = render_findings(audit(audit_dataset))
        assert text.startswith("audit_fixture: 97 findings")
        assert "people-noun" in text


class TestRuleSelection:
    def test_registry_order(self):
        assert resolve_rules("people-noun, ambiguous-numeric") == ("ambiguous-numeric", "people-noun")

    def test_all_and_default(self):
        assert resolve_rules("all") == tuple(RULES)
        assert resolve_rules("default") == DEFAULT_RULES
        assert "slot-pair-ambiguity" not in DEFAULT_RULES
        assert resolve_rules(None) == DEFAULT_RULES

    def test_unknown_rule(self):
        with pytest.raises(ValidationError):
            resolve_rules("pm-variants,typos")


class TestRules:
    """Each rule on small hand-built datasets."""

    def test_bare_number_needs_two_numeric_slots(self):
        ds = _dataset(_turn("a", " 12 "), _turn("b", "6 people"))
        assert [f.turn_id for f in find_ambiguous_numeric(ds)] == ["a"]
        single = SlotOntology.from_mapping({"people": {"questions": ["How many?"], "kind": "number"}})
        assert find_ambiguous_numeric(_dataset(_turn("a", "12"), ontology=single)) == []

    def test_single_time_style_not_flagged(self):
        ds = _dataset(_turn("a", "at 8 pm", "time", "8 pm"), _turn("b", "9 pm then", "time", "9 pm"))
        assert find_pm_variants(ds) == []

    def test_two_time_styles_flagged(self):
        ds = _dataset(_turn("a", "at 8 pm", "time", "8 pm"), _turn("b", "9 p.m. then", "time", "9 p.m."))
        assert [f.turn_id for f in find_pm_variants(ds)] == ["a", "b"]

    def test_time_slot_fallback_by_name(self):
        ontology = SlotOntology.from_mapping({"arrival_time": ["When?"], "place": ["Where?"]})
        ds = _dataset(
            _turn("a", "at 8 pm", "arrival_time", "8 pm"),
            _turn("b", "7 pm", "arrival_time", "7"),
            ontology=ontology,
        )
        assert len(find_pm_variants(ds)) == 2

    def test_function_word_consistent_usage(self):
        ds = _dataset(_turn("a", "see you on monday", "date", "monday"), _turn("b", "on friday", "date", "friday"))
        assert find_leading_function_words(ds) == []

    def test_function_word_disagreement(self):
        ds = _dataset(_turn("a", "book at 8", "time", "at 8"), _turn("b", "come at 9", "time", "9"))
        findings = find_leading_function_words(ds)
        assert [(f.turn_id, f.slot) for f in findings] == [("a", "time"), ("b", "time")]
        assert '"at" included in' in findings[0].reason
        assert '"at" left outside' in findings[1].reason

    def test_people_noun_with_and_without_noun(self):
        ds = _dataset(
            _turn("a", "a table for 4 people", "people", "4 people"),
            _turn("b", "a table for 4", "people", "4"),
        )
        findings = find_people_nouns(ds)
        assert [(f.turn_id, f.slot, f.evidence) for f in findings] == [("a", "people", "4 people"), ("b", "people", "4")]
        assert findings[1].reason.startswith("bare number")

    def test_people_noun_disagreement(self):
        ds = _dataset(
            _turn("a", "for 4 people", "people", "4 people"),
            _turn("b", "we are 2 people", "people", "2"),
            _turn("c", "we are 3 guests", "people", "3"),
        )
        findings = find_people_nouns(ds)
        assert [f.turn_id for f in findings] == ["a", "b", "c"]
        assert findings[1].reason.startswith('"people" left outside')
        assert findings[2].reason.startswith('"guests" left outside')

    def test_people_noun_untagged_ontology(self):
        ontology = SlotOntology.from_mapping({"people": ["How many?"], "date": ["When?"]})
        ds = _dataset(
            _turn("a", "for 4 people please", "people", "4 people"),
            _turn("b", "for 4 people please", "people", "4"),
            ontology=ontology,
        )
        assert [f.turn_id for f in find_people_nouns(ds)] == ["a", "b"]

    def test_people_noun_all_with_noun(self):
        ds = _dataset(_turn("a", "for 4 people", "people", "4 people"), _turn("b", "2 guests", "people", "2 guests"))
        assert find_people_nouns(ds) == []

    def test_people_noun_all_bare(self):
        ds = _dataset(_turn("a", "we are 2 people", "people", "2"), _turn("b", "3 people", "people", "3"))
        assert find_people_nouns(ds) == []

    def test_slot_pairs(self):
        ontology = SlotOntology.from_mapping(
            {"from_location": ["Where from?"], "to_location": ["Where to?"]},
            slot_pairs=[("from_location", "to_location")],
        )
        same = DialogTurn(
            "same", "fresno to fresno",
            gold_labels=(SpanLabel("from_location", 0, 6, "fresno"), SpanLabel("to_location", 10, 16, "fresno")),
        )
        swapped = _turn("swapped", "fresno", "from_location", "fresno", requested_slots=("to_location",))
        fine = _turn("fine", "fresno", "from_location", "fresno", requested_slots=("from_location",))
        findings = find_slot_pair_ambiguity(_dataset(same, swapped, fine, ontology=ontology))
        assert [(f.turn_id, f.slot) for f in findings] == [("same", "from_location"), ("swapped", "from_location")]
        assert "to_location was requested" in findings[1].reason

    def test_slot_pair_rule_off_by_default(self):
        ontology = SlotOntology.from_mapping(
            {"from_location": ["Where from?"], "to_location": ["Where to?"]},
            slot_pairs=[("from_location", "to_location")],
        )
        ds = _dataset(_turn("x", "fresno", "from_location", "fresno", requested_slots=("to_location",)), ontology=ontology)
        assert len(audit(ds)) == 0
        assert audit(ds, "slot-pair-ambiguity").counts == {"slot-pair-ambiguity": 1}
