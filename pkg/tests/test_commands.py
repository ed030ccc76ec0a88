import io
import json
from fractions import Fraction

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from corpus.loaders import load_sl
from corpus.models import CorpusSnapshot
from corpus.squad import parse_squad_json
from modeling.models import StageRecord, TrainingRun
from scoring.models import AuditFinding, AuditRun, EvaluationRun

from .conftest import GOLDEN_DIR

TINY_MODEL = {
    "preset": "toy",
    "hidden_size": 32,
    "num_layers": 2,
    "num_heads": 4,
    "intermediate_size": 64,
    "head_hidden_size": 32,
    "vocab_size": 512,
    "max_position": 64,
}


def _error(exc_info) -> dict:
    return json.loads(str(exc_info.value))


def _quiet(name, **options):
    out = io.StringIO()
    call_command(name, stdout=out, **options)
    return out.getvalue()


@pytest.fixture
def restaurants_file(tmp_path):
    path = tmp_path / "restaurants.json"
    _quiet("make_synthetic", kind="restaurants", n=30, output=str(path))
    return path


@pytest.mark.django_db
class TestConvert:
    """SL → SQuAD2.0 conversion command."""

    def test_writes_squad(self, bus_path, tmp_path):
        out = tmp_path / "bus.squad.json"
        _quiet("convert", input=str(bus_path), output=str(out))
        qa = parse_squad_json(out.read_bytes())
        assert len(qa) == 9
        assert CorpusSnapshot.objects.filter(kind="squad").count() == 1

    def test_repeat_is_idempotent(self, bus_path, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        _quiet("convert", input=str(bus_path), output=str(first))
        _quiet("convert", input=str(bus_path), output=str(second))
        assert first.read_bytes() == second.read_bytes()
        assert CorpusSnapshot.objects.filter(kind="squad").count() == 1, "Same bytes, same snapshot"
        assert CorpusSnapshot.objects.get(kind="squad").path == str(second)

    def test_options_change_output(self, bus_path, tmp_path):
        plain, with_system = tmp_path / "plain.json", tmp_path / "system.json"
        _quiet("convert", input=str(bus_path), output=str(plain))
        _quiet("convert", input=str(bus_path), output=str(with_system), mode="with_system", no_requested=True)
        assert plain.read_bytes() != with_system.read_bytes()
        doc = json.loads(with_system.read_text(encoding="utf-8"))
        question = doc["data"][1]["paragraphs"][0]["qas"][0]["question"]
        assert "<s>" not in question
        assert CorpusSnapshot.objects.filter(kind="squad").count() == 2

    def test_config_file_paths(self, bus_path, tmp_path):
        config = tmp_path / "convert.json"
        config.write_text(json.dumps({"input": str(bus_path), "output": "from_config.json"}), encoding="utf-8")
        _quiet("convert", config=str(config))
        assert (tmp_path / "from_config.json").exists()

    def test_record_runs_off(self, bus_path, tmp_path, settings):
        settings.QASL = {"RECORD_RUNS": False}
        _quiet("convert", input=str(bus_path), output=str(tmp_path / "bus.json"))
        assert CorpusSnapshot.objects.count() == 0


@pytest.mark.django_db
class TestCommandErrors:
    """Errors surface as JSON CommandErrors."""

    def test_invalid_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"slots": ', encoding="utf-8")
        with pytest.raises(CommandError) as exc:
            call_command("convert", input=str(bad), output=str(tmp_path / "out.json"))
        assert _error(exc)["error"] == "validation-error"
        assert "line 1" in _error(exc)["message"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            call_command("convert", input=str(tmp_path / "nope.json"), output=str(tmp_path / "out.json"))
        assert _error(exc)["error"] == "file-not-found"

    def test_missing_argument(self):
        with pytest.raises(CommandError) as exc:
            call_command("convert")
        assert _error(exc)["error"] == "missing-argument"

    def test_bad_split_fraction(self, restaurants_file, tmp_path):
        with pytest.raises(CommandError) as exc:
            call_command("split", input=str(restaurants_file), fraction="3/2", output=str(tmp_path / "splits"))
        assert _error(exc)["error"] == "split-size"

    def test_subsample_too_many(self, tmp_path):
        corpus = tmp_path / "generic.json"
        _quiet("make_synthetic", kind="generic_qa", n=5, output=str(corpus))
        with pytest.raises(CommandError) as exc:
            call_command("subsample", input=str(corpus), n=6)
        assert _error(exc)["error"] == "subsample-size"


@pytest.mark.django_db
class TestSplitAndSubsample:
    def test_split_writes_nested_files(self, restaurants_file, tmp_path):
        out = tmp_path / "splits"
        _quiet("split", input=str(restaurants_file), fraction="1/4", output=str(out), seed=2)
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        labels = list(manifest["splits"])
        assert labels == ["1/128", "1/64", "1/32", "1/16", "1/8", "1/4"]
        ids = []
        for label in labels:
            data = json.loads((out / manifest["splits"][label]["file"]).read_text(encoding="utf-8"))
            ids.append({turn["turn_id"] for turn in data["turns"]})
        for smaller, larger in zip(ids, ids[1:]):
            assert smaller <= larger
        assert manifest["splits"]["1/4"]["turns"] == 7

    def test_subsample_default_name(self, tmp_path):
        corpus = tmp_path / "generic.json"
        _quiet("make_synthetic", kind="generic_qa", n=100, output=str(corpus))
        _quiet("subsample", input=str(corpus), n=10, seed=1)
        sample = parse_squad_json((tmp_path / "generic.n10.json").read_bytes())
        assert len(sample) == 10

    def test_make_synthetic_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        _quiet("make_synthetic", kind="restaurants", n=20, seed=3, output=str(a))
        _quiet("make_synthetic", kind="restaurants", n=20, seed=3, output=str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_make_synthetic_sized_test_split(self, tmp_path):
        out = tmp_path / "homes_test.json"
        _quiet("make_synthetic", kind="sized", family="dstc8_homes", split="test", output=str(out))
        ds = load_sl(out)
        assert len(ds) == 328
        assert ds.name == "dstc8_homes_test"


@pytest.mark.django_db
class TestEvalCommand:
    """Scoring predictions from disk."""

    def test_golden(self, tmp_path):
        out = tmp_path / "metrics.json"
        stdout = _quiet("eval", preds=str(GOLDEN_DIR / "preds.jsonl"), gold=str(GOLDEN_DIR / "gold.json"), output=str(out))
        metrics = json.loads(out.read_text(encoding="utf-8"))
        assert abs(metrics["macro_f1"] - float(Fraction(20, 33))) < 1e-12
        assert abs(metrics["subsets"]["requested"]["macro_f1"] - float(Fraction(11, 15))) < 1e-12
        assert "macro F1 0.6061" in stdout
        run = EvaluationRun.objects.get()
        assert run.turns == 10
        assert run.subset == ""

    def test_subset_only(self, tmp_path):
        out = tmp_path / "metrics.json"
        _quiet(
            "eval", preds=str(GOLDEN_DIR / "preds.jsonl"), gold=str(GOLDEN_DIR / "gold.json"),
            subset="requested", output=str(out), quiet=True,
        )
        metrics = json.loads(out.read_text(encoding="utf-8"))
        assert metrics["subset"] == "requested"
        assert metrics["turns"] == 4
        assert EvaluationRun.objects.get().subset == "requested"

    def test_missing_predictions(self, tmp_path):
        lines = (GOLDEN_DIR / "preds.jsonl").read_text(encoding="utf-8").splitlines()
        preds = tmp_path / "preds.jsonl"
        preds.write_text("\n".join(lines[1:]) + "\n", encoding="utf-8")
        with pytest.raises(CommandError) as exc:
            call_command("eval", preds=str(preds), gold=str(GOLDEN_DIR / "gold.json"))
        error = _error(exc)
        assert error["error"] == "missing-predictions"
        assert error["details"] == ["t01:time"]
        assert EvaluationRun.objects.count() == 0


@pytest.mark.django_db
class TestAuditCommand:
    @pytest.fixture
    def fixture_file(self, tmp_path):
        path = tmp_path / "audit_fixture.json"
        _quiet("make_synthetic", kind="audit", output=str(path))
        return path

    def test_findings_recorded(self, fixture_file, tmp_path):
        out = tmp_path / "findings.json"
        _quiet("audit", input=str(fixture_file), output=str(out), quiet=True)
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["counts"] == {
            "ambiguous-numeric": 86, "pm-variants": 5, "leading-function-word": 3, "people-noun": 3,
        }
        run = AuditRun.objects.get()
        assert run.total_findings == 97
        assert run.findings.count() == 97
        assert AuditFinding.objects.filter(rule="pm-variants").count() == 5

    def test_threshold(self, fixture_file, tmp_path):
        out = tmp_path / "findings.json"
        with pytest.raises(CommandError) as exc:
            call_command("audit", input=str(fixture_file), output=str(out), max_findings=10, quiet=True)
        error = _error(exc)
        assert error["error"] == "audit-threshold-exceeded"
        assert error["details"][0]["ambiguous-numeric"] == 86
        assert out.exists(), "Findings are written before the threshold check"
        assert AuditRun.objects.count() == 1

    def test_rule_selection(self, fixture_file):
        stdout = _quiet("audit", input=str(fixture_file), rules="people-noun", max_findings=3)
        assert "3 findings" in stdout

    def test_unknown_rule(self, fixture_file):
        with pytest.raises(CommandError) as exc:
            call_command("audit", input=str(fixture_file), rules="typos")
        assert _error(exc)["error"] == "validation-error"


@pytest.mark.django_db
class TestTrainPredictEval:
    """A small end-to-end run through the command surface."""

    def _schedule(self, tmp_path, name, stage):
        path = tmp_path / name
        path.write_text(json.dumps({"seed": 0, "model": TINY_MODEL, "stages": [stage]}), encoding="utf-8")
        return path

    def test_full_pipeline(self, restaurants_file, tmp_path):
        schedule = self._schedule(tmp_path, "stage2.json", {
            "label": "stage2", "corpus": restaurants_file.name, "format": "sl",
            "learning_rate": 0.001, "batch_size": 16, "epochs": 2,
        })
        ckpt = tmp_path / "model.pt"
        _quiet("train", schedule=str(schedule), output=str(ckpt))
        assert ckpt.exists()
        stages = json.loads((tmp_path / "model.pt.report.json").read_text(encoding="utf-8"))["stages"]
        assert [s["stage_label"] for s in stages] == ["stage2"]
        assert stages[0]["steps"] == 2 * -(-30 * 5 // 16)

        run = TrainingRun.objects.get()
        assert run.status == "SUCCEEDED"
        assert StageRecord.objects.filter(run=run).count() == 1

        preds = tmp_path / "preds.jsonl"
        _quiet("predict", ckpt=str(ckpt), input=str(restaurants_file), output=str(preds))
        assert len(preds.read_text(encoding="utf-8").splitlines()) == 30 * 5

        metrics_path = tmp_path / "metrics.json"
        _quiet("eval", preds=str(preds), gold=str(restaurants_file), output=str(metrics_path), quiet=True)
        metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
        assert 0.0 <= metrics["macro_f1"] <= 1.0
        assert set(metrics["per_slot"]) == {"date", "time", "people", "first_name", "last_name"}

        adapters = self._schedule(tmp_path, "adapters.json", {
            "label": "stage2", "corpus": restaurants_file.name, "format": "sl", "regime": "adapters",
            "adapter": {"default_reduction_factor": 8, "boundary_reduction_factor": 4}, "batch_size": 16, "epochs": 1,
        })
        small = tmp_path / "adapters.pt"
        _quiet("train", schedule=str(adapters), output=str(small), init=str(ckpt), trainable_only=True)
        assert small.stat().st_size < ckpt.stat().st_size
        _quiet("predict", ckpt=str(small), input=str(restaurants_file), output=str(tmp_path / "adapter_preds.jsonl"))
        assert TrainingRun.objects.filter(status="SUCCEEDED").count() == 2

    def test_trainable_only_needs_init(self, restaurants_file, tmp_path):
        schedule = self._schedule(tmp_path, "s.json", {"label": "stage2", "corpus": restaurants_file.name, "format": "sl"})
        with pytest.raises(CommandError) as exc:
            call_command("train", schedule=str(schedule), output=str(tmp_path / "m.pt"), trainable_only=True)
        assert _error(exc)["error"] == "missing-argument"

    def test_failed_run_recorded(self, tmp_path):
        schedule = self._schedule(tmp_path, "s.json", {"label": "stage2", "corpus": "missing.json", "format": "sl"})
        with pytest.raises(CommandError) as exc:
            call_command("train", schedule=str(schedule), output=str(tmp_path / "m.pt"))
        assert _error(exc)["error"] == "file-not-found"
        assert TrainingRun.objects.get().status == "FAILED"
