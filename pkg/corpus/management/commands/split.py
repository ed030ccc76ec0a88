from pathlib import Path

from corpus.ledger import record_snapshot
from corpus.loaders import dump_sl, load_sl
from corpus.management.base import QaslCommand, fail
from corpus.sampling import sample_all_splits
from corpus.utils import atomic_write_bytes, atomic_write_json, dumps_pretty


def split_filename(name: str, label: str) -> str:
    return f"{name}_{label.replace('/', '-')}.json"


class Command(QaslCommand):
    help = "Write nested few-shot splits of an SL dataset (every fraction up to --fraction)"

    def add_command_arguments(self, parser):
        parser.add_argument("--in", dest="input", type=str, help="Native SL JSON file")
        parser.add_argument("--fraction", type=str, default=None, help="Largest fraction to emit (default 1)")
        parser.add_argument("--out", dest="output", type=str, help="Output directory")

    def handle(self, *args, **options):
        config = self.load_config(options)
        input_path = self.config_path(config, self.option(options, config, "input"))
        out_dir = self.config_path(config, self.option(options, config, "output"))
        if not input_path or not out_dir:
            raise fail("missing-argument", "--in and --out are required")
        fraction = self.option(options, config, "fraction", "1")
        seed = self.seed(options, config)

        ds = load_sl(input_path)
        splits = sample_all_splits(ds, seed=seed, up_to=fraction)
        out_dir = Path(out_dir)

        manifest = {"source": str(input_path), "name": ds.name, "seed": seed, "splits": {}}
        for label, split in splits.items():
            filename = split_filename(ds.name, label)
            data = dumps_pretty(dump_sl(split)).encode("utf-8")
            atomic_write_bytes(out_dir / filename, data)
            record_snapshot(
                "sl", f"{ds.name}@{label}", out_dir / filename, data, len(split), "split",
                {"fraction": label, "seed": seed},
            )
            manifest["splits"][label] = {"file": filename, "turns": len(split)}
            self.stdout.write(f"  {label}: {len(split)} turns -> {filename}")

        atomic_write_json(out_dir / "manifest.json", manifest)
        self.stdout.write(self.style.SUCCESS(f"{len(splits)} splits written to {out_dir}"))
