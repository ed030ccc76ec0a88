from pathlib import Path

from corpus.ledger import record_snapshot
from corpus.management.base import QaslCommand, fail
from corpus.sampling import subsample_qa
from corpus.squad import emit_squad_json, parse_squad_json
from corpus.utils import atomic_write_bytes


class Command(QaslCommand):
    help = "Uniformly subsample a SQuAD2.0 corpus without replacement"

    def add_command_arguments(self, parser):
        parser.add_argument("--in", dest="input", type=str, help="SQuAD2.0 JSON file")
        parser.add_argument("--n", type=int, default=None, help="Number of QA examples to keep")
        parser.add_argument("--out", dest="output", type=str, default=None,
                            help="Output file (default <input stem>.n<N>.json)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        input_path = self.config_path(config, self.option(options, config, "input"))
        n = self.option(options, config, "n")
        if not input_path or n is None:
            raise fail("missing-argument", "--in and --n are required")
        seed = self.seed(options, config)
        input_path = Path(input_path)
        output_path = self.config_path(config, self.option(options, config, "output"))
        output_path = Path(output_path) if output_path else input_path.with_name(f"{input_path.stem}.n{n}.json")

        qa = parse_squad_json(input_path.read_bytes(), name=input_path.stem)
        sample = subsample_qa(qa, int(n), seed=seed)
        data = emit_squad_json(sample)
        atomic_write_bytes(output_path, data)
        record_snapshot("squad", f"{qa.name}[{n}]", output_path, data, len(sample), "subsample",
                        {"seed": seed, "source": str(input_path)})
        self.stdout.write(self.style.SUCCESS(
            f"{len(sample)} of {len(qa)} examples written to {output_path}"
        ))
