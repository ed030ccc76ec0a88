from corpus.loaders import load_sl, sl_to_qa
from corpus.management.base import QaslCommand, fail
from corpus.reformulate import PromptSpec
from corpus.types import ContextMode
from modeling.checkpoint import load_checkpoint
from modeling.decode import DecodeConfig, batch_decode, write_predictions


class Command(QaslCommand):
    help = "Decode span predictions (JSON lines) for every slot question of an SL dataset"

    def add_command_arguments(self, parser):
        parser.add_argument("--ckpt", type=str, help="Checkpoint path")
        parser.add_argument("--base", type=str, default=None, help="Base checkpoint for trainable-only checkpoints")
        parser.add_argument("--in", dest="input", type=str, help="Native SL JSON file")
        parser.add_argument("--out", dest="output", type=str, help="Predictions JSONL")
        parser.add_argument("--mode", type=str, choices=[m.value for m in ContextMode], default=None,
                            help="Context mode (default: the one the checkpoint was trained with)")
        parser.add_argument("--no-requested", dest="no_requested", action="store_true", default=None)
        parser.add_argument("--threshold", type=float, default=None, help="No-answer threshold (default: the last stage's)")
        parser.add_argument("--max-span-tokens", dest="max_span_tokens", type=int, default=None)

    def handle(self, *args, **options):
        config = self.load_config(options)
        ckpt = self.config_path(config, self.option(options, config, "ckpt"))
        input_path = self.config_path(config, self.option(options, config, "input"))
        output = self.config_path(config, self.option(options, config, "output"))
        if not ckpt or not input_path or not output:
            raise fail("missing-argument", "--ckpt, --in and --out are required")

        model, info = load_checkpoint(ckpt, base=self.config_path(config, self.option(options, config, "base")))
        trained = info.reformulation
        mode = self.option(options, config, "mode", trained.get("mode", ContextMode.USER_ONLY.value))
        if self.option(options, config, "no_requested", False):
            use_requested = False
        else:
            use_requested = bool(trained.get("use_requested", True))
        cfg = DecodeConfig.from_settings(
            threshold=self.option(options, config, "threshold", trained.get("no_answer_threshold")),
            max_span_tokens=self.option(options, config, "max_span_tokens"),
        )

        ds = load_sl(input_path)
        qa = sl_to_qa(ds, PromptSpec.for_ontology(ds.ontology, use_requested=use_requested), mode)
        predictions = batch_decode(model, qa, cfg)
        write_predictions(output, predictions)
        answered = sum(1 for p in predictions if not p.is_no_answer)
        self.stdout.write(self.style.SUCCESS(
            f"{len(predictions)} predictions ({answered} spans) written to {output}"
        ))
