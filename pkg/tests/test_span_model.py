import logging

import pytest
import torch

from corpus.exceptions import AdapterConfigError, QuestionTooLongError, RegimeError
from corpus.types import AdapterConfig, ModelConfig, Regime
from modeling.adapters import adapter_parameter_count, bottleneck_widths
from modeling.checkpoint import load_checkpoint, save_checkpoint
from modeling.encoder import CLS_ID, SEP_ID, SLOT_SEP_ID, EncoderInterface, ToyTokenizer, classify_parameter
from modeling.span_model import (
    SpanModel,
    adapter_widths,
    build_model,
    collate,
    count_parameters,
    count_trainable,
    forward,
    insert_adapters,
    select_trainable,
    trainable_storage_bytes,
)

from .conftest import tiny_config


def _logits(model, pairs):
    model.eval()
    with torch.no_grad():
        return model(*collate(pairs))


class TestTokenizer:
    def test_offsets_cover_tokens(self):
        tokenizer = ToyTokenizer(512)
        text = "Table for 4 at 7:30 pm <s> people"
        ids, offsets = tokenizer.tokenize(text)
        assert [text[s:e] for s, e in offsets] == ["Table", "for", "4", "at", "7", ":", "30", "pm", "<s>", "people"]
        assert ids[8] == SLOT_SEP_ID
        assert ids[0] == tokenizer.tokenize("table")[0][0], "Ids are case-insensitive"


class TestEncoding:
    """Question/context packing and the user-utterance region."""

    def test_layout(self, toy_model):
        pair = toy_model.encode("What time?", "at 8 pm", qid="q")
        assert pair.input_ids[0] == CLS_ID
        assert pair.anchor == 0
        assert pair.input_ids[pair.special_positions[1]] == SEP_ID
        assert pair.input_ids[-1] == SEP_ID
        # question "What", "time", "?" then [SEP]
        assert pair.valid_region == (5, 8)
        assert pair.token_type_ids[:5] == (0,) * 5
        assert set(pair.token_type_ids[5:]) == {1}

    def test_region_excludes_system_text(self, toy_model):
        context = "How many? we are 6"
        pair = toy_model.encode("How many people?", context, user_region=(10, len(context)))
        lo, hi = pair.valid_region
        covered = [context[pair.offsets[i][0]:pair.offsets[i][1]] for i in range(lo, hi)]
        assert covered == ["we", "are", "6"]

    def test_token_span(self, toy_model):
        pair = toy_model.encode("What time?", "book it at 8 pm please")
        start, end = pair.token_span(11, 15)
        assert [pair.offsets[i] for i in (start, end)] == [(11, 12), (13, 15)]

    def test_truncation_logged(self, caplog):
        model = build_model(tiny_config(max_position=16))
        with caplog.at_level(logging.WARNING, logger="modeling.span_model"):
            pair = model.encode("What time?", " ".join(["word"] * 40), qid="long")
        assert len(pair) == 16
        assert pair.truncated_tokens > 0
        assert "long" in caplog.text

    def test_question_too_long(self):
        model = build_model(tiny_config(max_position=8))
        with pytest.raises(QuestionTooLongError):
            model.encode("one two three four five six", "ok")


class TestSpanModel:
    """Forward shapes, determinism, and the encoder contract."""

    def test_encoder_contract(self, toy_model):
        assert isinstance(toy_model.encoder, EncoderInterface)
        assert toy_model.encoder.num_layers == 2

    def test_two_logits_per_token(self, toy_model):
        out = forward(toy_model, "What time?", "at 8 pm")
        pair = toy_model.encode("What time?", "at 8 pm")
        assert out.start_logits.shape == (len(pair),)
        assert out.end_logits.shape == (len(pair),)

    def test_padding_does_not_change_logits(self, toy_model):
        short = toy_model.encode("What time?", "at 8 pm")
        long = toy_model.encode("What time?", "we would like to come at 8 pm tonight please")
        alone, _ = _logits(toy_model, [short])
        batched, _ = _logits(toy_model, [short, long])
        assert torch.allclose(alone[0], batched[0, :len(short)], atol=1e-5)

    def test_same_seed_same_model(self, toy_config):
        a = build_model(toy_config, seed=3)
        b = build_model(toy_config, seed=3)
        for (name, x), (_, y) in zip(a.state_dict().items(), b.state_dict().items()):
            assert torch.equal(x, y), name
        first = forward(a, "What time?", "at 8 pm")
        second = forward(a, "What time?", "at 8 pm")
        assert (first.start_logits == second.start_logits).all()

    def test_build_model_leaves_global_rng(self, toy_config):
        torch.manual_seed(11)
        expected = torch.rand(3)
        torch.manual_seed(11)
        build_model(toy_config, seed=5)
        assert torch.equal(torch.rand(3), expected)


class TestAdapters:
    """Bottleneck widths, parameter counts and identity at insertion."""

    def test_widths_toy(self):
        assert bottleneck_widths(64, 4, AdapterConfig(16, 8)) == [8, 4, 4, 8]

    def test_widths_need_two_layers(self):
        with pytest.raises(AdapterConfigError):
            bottleneck_widths(64, 1, AdapterConfig())

    def test_factor_larger_than_hidden(self):
        with pytest.raises(AdapterConfigError):
            bottleneck_widths(4, 2, AdapterConfig(16, 8))

    def test_non_dividing_factor_floors(self, caplog):
        with caplog.at_level(logging.WARNING, logger="modeling.adapters"):
            assert bottleneck_widths(50, 3, AdapterConfig(16, 8)) == [6, 3, 6]
        assert "floored" in caplog.text

    def test_identity_at_insertion(self):
        model = build_model(tiny_config(hidden_size=64, num_layers=4, head_hidden_size=64), seed=1)
        before = forward(model, "How many people? <s> people", "we are 6")
        insert_adapters(model, AdapterConfig(16, 8), seed=2)
        after = forward(model, "How many people? <s> people", "we are 6")
        assert adapter_widths(model) == [8, 4, 4, 8]
        assert abs(before.start_logits - after.start_logits).max() < 1e-6
        assert abs(before.end_logits - after.end_logits).max() < 1e-6

    def test_parameter_count_closed_form(self):
        model = build_model(tiny_config(hidden_size=64, num_layers=4, head_hidden_size=64))
        insert_adapters(model, AdapterConfig(16, 8))
        counted = sum(p.numel() for name, p in model.named_parameters() if ".adapter." in name)
        expected = sum(adapter_parameter_count(64, w) for w in (8, 4, 4, 8))
        assert counted == expected == 2 * (2 * 64 * 8 + 8 + 64) + 2 * (2 * 64 * 4 + 4 + 64)

    def test_insert_twice(self, toy_model):
        insert_adapters(toy_model, AdapterConfig(16, 8))
        with pytest.raises(AdapterConfigError):
            insert_adapters(toy_model, AdapterConfig(16, 8))

    def test_roberta_base_sized_budget(self):
        """Adapters + head stay under 2% of a roberta-base-sized backbone."""
        with torch.device("meta"):
            model = SpanModel(ModelConfig.roberta_base_sized())
            insert_adapters(model, AdapterConfig(16, 8))
        assert adapter_widths(model) == [96] + [48] * 10 + [96]
        adapters = sum(p.numel() for name, p in model.named_parameters() if ".adapter." in name)
        head = sum(p.numel() for p in model.head.parameters())
        assert adapters == 1_042_080
        assert head == 1_002_302
        mask = select_trainable(model, Regime.ADAPTERS)
        trainable = count_trainable(model, mask)
        assert trainable == adapters + head
        assert trainable / count_parameters(model) < 0.02
        assert adapters / count_parameters(model) < 0.01


class TestTrainableMasks:
    """Which parameters each regime trains."""

    def test_full(self, toy_model):
        mask = select_trainable(toy_model, Regime.FULL)
        assert set(mask.paths) == {name for name, _ in toy_model.named_parameters()}

    def test_head_only(self, toy_model):
        mask = select_trainable(toy_model, Regime.HEAD_ONLY)
        assert set(mask.paths) == {name for name, _ in toy_model.named_parameters() if name.startswith("head.")}

    def test_bitfit(self, toy_model):
        mask = select_trainable(toy_model, Regime.BITFIT)
        backbone = [path for path in mask if not path.startswith("head.")]
        assert backbone, "Attention biases should be trainable"
        assert all(classify_parameter(path) == "attention_bias" for path in backbone)
        assert not any(path.endswith("weight") for path in backbone)
        wide = select_trainable(toy_model, Regime.BITFIT, bitfit_all_biases=True)
        assert set(mask.paths) < set(wide.paths)
        assert "encoder.layers.0.attention_norm.bias" in wide
        assert "encoder.layers.0.attention_norm.bias" not in mask

    def test_adapters_need_insertion(self, toy_model):
        with pytest.raises(RegimeError):
            select_trainable(toy_model, Regime.ADAPTERS)

    def test_adapters(self, toy_model):
        insert_adapters(toy_model, AdapterConfig(4, 4))
        mask = select_trainable(toy_model, Regime.ADAPTERS)
        head = select_trainable(toy_model, Regime.HEAD_ONLY)
        assert set(head.paths) < set(mask.paths)
        assert all(".adapter." in path for path in set(mask.paths) - set(head.paths))
        assert trainable_storage_bytes(toy_model, mask) == 4 * count_trainable(toy_model, mask)


class TestCheckpoints:
    """Save / load, including trainable-only checkpoints on top of a base."""

    def test_round_trip(self, toy_model, tmp_path):
        path = save_checkpoint(tmp_path / "model.pt", toy_model, reformulation={"mode": "user_only"})
        loaded, info = load_checkpoint(path)
        assert info.model_config == toy_model.config
        assert info.reformulation == {"mode": "user_only"}
        for (name, x), (_, y) in zip(toy_model.state_dict().items(), loaded.state_dict().items()):
            assert torch.equal(x, y), name

    def test_trainable_only(self, toy_model, tmp_path):
        base = save_checkpoint(tmp_path / "base.pt", toy_model)
        insert_adapters(toy_model, AdapterConfig(4, 4), seed=1)
        mask = select_trainable(toy_model, Regime.ADAPTERS)
        with torch.no_grad():
            toy_model.encoder.layers[0].adapter.up_project.bias.fill_(0.5)
        small = save_checkpoint(tmp_path / "adapters.pt", toy_model, mask=mask, trainable_only=True, base=base)
        assert small.stat().st_size < base.stat().st_size

        restored, info = load_checkpoint(small)
        assert info.mask_regime == "adapters"
        assert restored.has_adapters
        expected = forward(toy_model, "What time?", "at 8 pm")
        actual = forward(restored, "What time?", "at 8 pm")
        assert abs(expected.start_logits - actual.start_logits).max() < 1e-6
