from pathlib import Path

from corpus.loaders import load_sl
from corpus.management.base import QaslCommand, fail
from corpus.utils import atomic_write_json
from modeling.decode import read_predictions
from scoring.evaluate import SUBSET_FILTERS, evaluate, evaluate_with_subsets, render_table
from scoring.ledger import record_evaluation


class Command(QaslCommand):
    help = "Score span predictions against a gold SL dataset with exact-span slot F1"

    def add_command_arguments(self, parser):
        parser.add_argument("--preds", type=str, help="Predictions JSONL (from predict)")
        parser.add_argument("--gold", type=str, help="Gold native SL JSON file")
        parser.add_argument("--subset", type=str, choices=sorted(SUBSET_FILTERS), default=None,
                            help="Score only this subset of turns")
        parser.add_argument("--out", dest="output", type=str, default=None, help="Metrics JSON output")
        parser.add_argument("--quiet", action="store_true", default=None, help="Do not print the table")

    def handle(self, *args, **options):
        config = self.load_config(options)
        preds_path = self.config_path(config, self.option(options, config, "preds"))
        gold_path = self.config_path(config, self.option(options, config, "gold"))
        output = self.config_path(config, self.option(options, config, "output"))
        subset = self.option(options, config, "subset")
        if not preds_path or not gold_path:
            raise fail("missing-argument", "--preds and --gold are required")
        if subset is not None and subset not in SUBSET_FILTERS:
            raise fail("invalid-value", f"unknown subset {subset!r}", sorted(SUBSET_FILTERS))

        ds = load_sl(gold_path)
        predictions = read_predictions(preds_path)
        if subset:
            report = evaluate(predictions, ds, SUBSET_FILTERS[subset], subset_name=subset)
        else:
            report = evaluate_with_subsets(predictions, ds)

        if output:
            atomic_write_json(output, report.to_dict())
        record_evaluation(preds_path, gold_path, Path(gold_path).read_bytes(), report)
        if not self.option(options, config, "quiet", False):
            self.stdout.write(render_table(report))
        self.stdout.write(self.style.SUCCESS(f"macro F1 {report.macro_f1:.4f}"))
