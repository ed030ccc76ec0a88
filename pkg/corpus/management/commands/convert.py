from pathlib import Path

from corpus.conf import qasl_setting
from corpus.ledger import record_snapshot
from corpus.loaders import load_sl, sl_to_qa
from corpus.management.base import QaslCommand, fail
from corpus.reformulate import PromptSpec
from corpus.squad import emit_squad_json
from corpus.types import ContextMode
from corpus.utils import atomic_write_bytes


class Command(QaslCommand):
    help = "Convert an SL dataset to SQuAD2.0 JSON (one question per slot per turn)"

    def add_command_arguments(self, parser):
        parser.add_argument("--in", dest="input", type=str, help="Native SL JSON file")
        parser.add_argument("--out", dest="output", type=str, help="SQuAD2.0 JSON output")
        parser.add_argument("--mode", type=str, choices=[m.value for m in ContextMode], default=None)
        parser.add_argument(
            "--no-requested",
            dest="no_requested",
            action="store_true",
            default=None,
            help="Do not append requested-slot prompts to questions",
        )
        parser.add_argument(
            "--paraphrases",
            action="store_true",
            default=None,
            help="Also emit one example per alternate slot question",
        )

    def handle(self, *args, **options):
        config = self.load_config(options)
        input_path = self.config_path(config, self.option(options, config, "input"))
        output_path = self.config_path(config, self.option(options, config, "output"))
        if not input_path or not output_path:
            raise fail("missing-argument", "--in and --out are required")
        mode = self.option(options, config, "mode", qasl_setting("CONTEXT_MODE"))
        use_requested = not self.option(options, config, "no_requested", False)
        paraphrases = bool(self.option(options, config, "paraphrases", False))

        ds = load_sl(input_path)
        spec = PromptSpec.for_ontology(ds.ontology, use_requested=use_requested)
        qa = sl_to_qa(ds, spec, mode, paraphrases=paraphrases)
        data = emit_squad_json(qa)
        atomic_write_bytes(output_path, data)

        record_snapshot(
            "squad",
            qa.name,
            Path(output_path),
            data,
            len(qa),
            "convert",
            {"mode": ContextMode(mode).value, "use_requested": use_requested, "source": str(input_path)},
        )
        self.stdout.write(self.style.SUCCESS(
            f"{ds.name}: {len(ds)} turns -> {len(qa)} QA examples written to {output_path}"
        ))
