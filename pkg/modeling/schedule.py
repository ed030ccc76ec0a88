"""
Declarative stage schedules.

A schedule is an ordered list of (corpus reference, FineTuneConfig, label)
entries with labels stage1a / stage1b / stage1 / stage2. Stages run in
order, each on the previous stage's model. At most one stage2 is allowed
and it must come last.

Stage 1 presets name the usual QA-tuning regimes: single-corpus presets
(squad, mrqa, paq5, paq20) give one stage1 entry, chained presets
(paq5-squad, ...) give stage1a on the large noisy corpus then stage1b on
the curated one.

Config files are JSON; see docs/CONFIG.md and docs/schedule.schema.json.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from django.core.exceptions import ValidationError

from corpus.conf import qasl_setting
from corpus.loaders import QADataset, load_sl, sl_to_qa
from corpus.reformulate import PromptSpec
from corpus.squad import parse_squad_json
from corpus.types import AdapterConfig, ContextMode, FineTuneConfig, ModelConfig, Regime
from corpus.utils import read_json

from .span_model import SpanModel
from .train import TrainReport, run_stage

logger = logging.getLogger(__name__)

STAGE_LABELS = ("stage1a", "stage1b", "stage1", "stage2")
CORPUS_FORMATS = ("squad", "sl")

STAGE1_PRESETS: dict[str, tuple[str, ...]] = {
    "squad": ("squad",),
    "mrqa": ("mrqa",),
    "paq5": ("paq5",),
    "paq20": ("paq20",),
    "paq5-squad": ("paq5", "squad"),
    "paq5-mrqa": ("paq5", "mrqa"),
    "paq20-squad": ("paq20", "squad"),
    "paq20-mrqa": ("paq20", "mrqa"),
}


@dataclass(frozen=True)
class ScheduleEntry:
    corpus: str
    config: FineTuneConfig
    label: str
    corpus_format: str = "squad"

    def __post_init__(self):
        if self.label not in STAGE_LABELS:
            raise ValidationError(f"stage label {self.label!r} is not one of {', '.join(STAGE_LABELS)}")
        if self.corpus_format not in CORPUS_FORMATS:
            raise ValidationError(f"corpus format {self.corpus_format!r} is not squad or sl")


@dataclass(frozen=True)
class StageSchedule:
    entries: tuple[ScheduleEntry, ...]
    mode: ContextMode = ContextMode.USER_ONLY
    use_requested: bool = True

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "mode", ContextMode(self.mode))
        if not self.entries:
            raise ValidationError("schedule must have at least one stage")
        labels = [entry.label for entry in self.entries]
        if labels.count("stage2") > 1:
            raise ValidationError("schedule may contain at most one stage2")
        if "stage2" in labels and labels[-1] != "stage2":
            raise ValidationError("stage2 must be the last stage")

    def __len__(self) -> int:
        return len(self.entries)


CorpusSource = Union[Mapping[str, QADataset], Callable[[ScheduleEntry], QADataset]]


def run_schedule(
    model: SpanModel,
    schedule: StageSchedule,
    seed: int,
    corpora: CorpusSource,
) -> tuple[SpanModel, list[TrainReport]]:
    """Apply every stage in order; `corpora` maps corpus references to QA datasets."""
    reports = []
    for entry in schedule.entries:
        qa = corpora(entry) if callable(corpora) else corpora[entry.corpus]
        model, report = run_stage(model, qa, entry.config, seed=seed, stage_label=entry.label)
        reports.append(report)
    return model, reports


def run_seeds(
    build: Callable[[int], SpanModel],
    schedule: StageSchedule,
    seeds: Iterable[int],
    corpora: CorpusSource,
) -> list[tuple[SpanModel, list[TrainReport]]]:
    """Repeat a schedule from fresh models, one per seed."""
    return [run_schedule(build(seed), schedule, seed, corpora) for seed in seeds]


def preset_schedule(
    preset: str,
    stage2_corpus: Optional[str] = None,
    stage1_config: Optional[FineTuneConfig] = None,
    stage2_config: Optional[FineTuneConfig] = None,
    corpus_names: Optional[Mapping[str, str]] = None,
    stage2_format: str = "sl",
) -> StageSchedule:
    """Expand a Stage 1 preset (optionally followed by stage2) into a schedule."""
    if preset not in STAGE1_PRESETS:
        raise ValidationError(f"unknown stage1 preset {preset!r}; choose from {', '.join(STAGE1_PRESETS)}")
    names = dict(corpus_names or {})
    chain = STAGE1_PRESETS[preset]
    stage1_config = stage1_config or FineTuneConfig.for_stage("stage1")
    labels = ("stage1",) if len(chain) == 1 else ("stage1a", "stage1b")
    entries = [
        ScheduleEntry(names.get(corpus, corpus), stage1_config, label, "squad")
        for corpus, label in zip(chain, labels)
    ]
    if stage2_corpus is not None:
        entries.append(
            ScheduleEntry(stage2_corpus, stage2_config or FineTuneConfig.for_stage("stage2"), "stage2", stage2_format)
        )
    return StageSchedule(tuple(entries))


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

_STAGE_KEYS = {
    "label", "corpus", "format", "regime", "learning_rate", "batch_size", "epochs", "adapter",
    "no_answer_threshold", "warmup_steps", "linear_decay", "max_grad_norm", "reinit_head",
    "bitfit_all_biases", "paraphrases",
}


@dataclass(frozen=True)
class TrainingPlan:
    """Everything a `train` run needs, resolved from a config file."""

    schedule: StageSchedule
    model: ModelConfig
    seed: int = 0
    init_checkpoint: Optional[str] = None


def _resolve(base: Path, value: str) -> str:
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def _stage_config(raw: Mapping[str, Any], where: str) -> FineTuneConfig:
    unknown = set(raw) - _STAGE_KEYS
    if unknown:
        raise ValidationError(f"{where}: unknown keys {', '.join(sorted(unknown))}")
    label = raw.get("label", "stage2")
    overrides = {k: raw[k] for k in _STAGE_KEYS - {"label", "corpus", "format", "regime", "adapter"} if k in raw}
    try:
        regime = Regime(raw.get("regime", Regime.FULL.value))
        if regime is Regime.ADAPTERS and raw.get("adapter"):
            overrides["adapter"] = AdapterConfig.from_dict(raw["adapter"])
        return FineTuneConfig.for_stage(label, regime, **overrides)
    except (ValidationError, ValueError) as exc:
        messages = exc.messages if isinstance(exc, ValidationError) else [str(exc)]
        raise ValidationError([f"{where}: {m}" for m in messages]) from exc


def parse_plan(data: Mapping[str, Any], base_dir: Union[str, Path] = ".") -> TrainingPlan:
    """
    Build a TrainingPlan from a decoded config. Either "stages" or
    "stage1_preset" (+ "corpora", optional "stage2") must be given.
    """
    base = Path(base_dir)
    if not isinstance(data, Mapping):
        raise ValidationError("config: top level must be an object")
    mode = data.get("mode", qasl_setting("CONTEXT_MODE"))
    use_requested = bool(data.get("use_requested", True))

    if "stages" in data:
        if not isinstance(data["stages"], list):
            raise ValidationError("stages: expected list")
        entries = []
        for i, raw in enumerate(data["stages"]):
            where = f"stages[{i}]"
            if not isinstance(raw, Mapping) or "corpus" not in raw:
                raise ValidationError(f"{where}.corpus: required")
            entries.append(
                ScheduleEntry(
                    corpus=_resolve(base, raw["corpus"]),
                    config=_stage_config(raw, where),
                    label=raw.get("label", "stage2"),
                    corpus_format=raw.get("format", "squad"),
                )
            )
        schedule = StageSchedule(tuple(entries), mode=mode, use_requested=use_requested)
    elif "stage1_preset" in data:
        corpora = {k: _resolve(base, v) for k, v in (data.get("corpora") or {}).items()}
        preset = data["stage1_preset"]
        missing = [c for c in STAGE1_PRESETS.get(preset, ()) if c not in corpora]
        if missing:
            raise ValidationError(f"corpora: preset {preset!r} needs {', '.join(missing)}")
        stage1 = _stage_config({**(data.get("stage1") or {}), "label": "stage1"}, "stage1")
        stage2_raw = data.get("stage2")
        stage2_corpus = stage2_config = None
        stage2_format = "sl"
        if stage2_raw:
            if "corpus" not in stage2_raw:
                raise ValidationError("stage2.corpus: required")
            stage2_corpus = _resolve(base, stage2_raw["corpus"])
            stage2_format = stage2_raw.get("format", "sl")
            stage2_config = _stage_config({**stage2_raw, "label": "stage2"}, "stage2")
        schedule = preset_schedule(preset, stage2_corpus, stage1, stage2_config, corpora, stage2_format)
        schedule = replace(schedule, mode=ContextMode(mode), use_requested=use_requested)
    else:
        raise ValidationError("config: either stages or stage1_preset is required")

    init = data.get("init_checkpoint")
    return TrainingPlan(
        schedule=schedule,
        model=ModelConfig.from_dict(data.get("model") or {}),
        seed=int(data.get("seed", 0)),
        init_checkpoint=_resolve(base, init) if init else None,
    )


def load_plan(path: Union[str, Path]) -> TrainingPlan:
    path = Path(path)
    return parse_plan(read_json(path), base_dir=path.resolve().parent)


def file_corpus_loader(schedule: StageSchedule) -> Callable[[ScheduleEntry], QADataset]:
    """Loads each entry's corpus from disk (SL files are reformulated on the fly), with caching."""
    cache: dict[tuple[str, str, bool], QADataset] = {}

    def load(entry: ScheduleEntry) -> QADataset:
        key = (entry.corpus, entry.corpus_format, entry.config.paraphrases)
        if key not in cache:
            path = Path(entry.corpus)
            if entry.corpus_format == "squad":
                cache[key] = parse_squad_json(path.read_bytes(), name=path.stem)
            else:
                ds = load_sl(path)
                spec = PromptSpec.for_ontology(ds.ontology, use_requested=schedule.use_requested)
                cache[key] = sl_to_qa(ds, spec, schedule.mode, paraphrases=entry.config.paraphrases)
            logger.info("Loaded %s corpus %s: %d examples", entry.corpus_format, path, len(cache[key]))
        return cache[key]

    return load
