from pathlib import Path

from corpus.conf import qasl_setting
from corpus.exceptions import AuditThresholdExceeded
from corpus.loaders import load_sl
from corpus.management.base import QaslCommand, fail
from corpus.utils import atomic_write_json
from scoring.audit import audit, render_findings
from scoring.ledger import record_audit


class Command(QaslCommand):
    help = "Audit an SL dataset for ambiguous utterances and annotation inconsistencies"

    def add_command_arguments(self, parser):
        parser.add_argument("--in", dest="input", type=str, help="Native SL JSON file")
        parser.add_argument("--rules", type=str, default=None,
                            help='Comma-separated rule ids, "default" or "all" (default: default)')
        parser.add_argument("--out", dest="output", type=str, default=None, help="Findings JSON output")
        parser.add_argument("--max-findings", dest="max_findings", type=int, default=None,
                            help="Fail (exit 1) when findings exceed this number")
        parser.add_argument("--quiet", action="store_true", default=None, help="Do not print the findings table")

    def handle(self, *args, **options):
        config = self.load_config(options)
        input_path = self.config_path(config, self.option(options, config, "input"))
        output = self.config_path(config, self.option(options, config, "output"))
        if not input_path:
            raise fail("missing-argument", "--in is required")
        rules = self.option(options, config, "rules")
        max_findings = self.option(options, config, "max_findings", qasl_setting("AUDIT_MAX_FINDINGS"))

        ds = load_sl(input_path)
        report = audit(ds, rules)
        if output:
            atomic_write_json(output, report.to_dict())
        record_audit(input_path, Path(input_path).read_bytes(), report)
        if not self.option(options, config, "quiet", False):
            self.stdout.write(render_findings(report))

        if max_findings is not None and len(report) > int(max_findings):
            raise AuditThresholdExceeded(
                f"{len(report)} findings exceed the threshold of {max_findings}",
                details=[report.counts],
            )
        self.stdout.write(self.style.SUCCESS(f"{len(report)} findings"))
