from pathlib import Path

from corpus.ledger import record_snapshot
from corpus.loaders import dump_sl
from corpus.management.base import QaslCommand, fail
from corpus.sampling import PUBLISHED_SPLIT_SIZES
from corpus.squad import emit_squad_json
from corpus.synthetic import (
    make_audit_fixture,
    make_generic_qa,
    make_restaurant_dataset,
    make_sized_dataset,
)
from corpus.utils import atomic_write_bytes, dumps_pretty

KINDS = ("restaurants", "sized", "generic_qa", "audit")


class Command(QaslCommand):
    help = "Generate deterministic synthetic corpora (SL benchmark, sized splits source, generic QA, audit fixture)"

    def add_command_arguments(self, parser):
        parser.add_argument("--kind", type=str, choices=KINDS, default=None)
        parser.add_argument("--n", type=int, default=None, help="Turns (SL) or examples (QA)")
        parser.add_argument("--family", type=str, choices=sorted(PUBLISHED_SPLIT_SIZES), default=None,
                            help="Benchmark family for --kind sized")
        parser.add_argument("--split", type=str, choices=("train", "test"), default=None,
                            help="Train or test size for --kind sized (default train)")
        parser.add_argument("--bare-fraction", dest="bare_fraction", type=float, default=None,
                            help="Share of bare-number turns (restaurants)")
        parser.add_argument("--name", type=str, default=None)
        parser.add_argument("--out", dest="output", type=str, help="Output file")

    def handle(self, *args, **options):
        config = self.load_config(options)
        kind = self.option(options, config, "kind", "restaurants")
        output = self.config_path(config, self.option(options, config, "output"))
        if not output:
            raise fail("missing-argument", "--out is required")
        seed = self.seed(options, config)
        n = self.option(options, config, "n")
        name = self.option(options, config, "name")

        if kind == "generic_qa":
            qa = make_generic_qa(int(n or 1000), seed=seed, name=name or "synthetic_generic_qa")
            data = emit_squad_json(qa)
            record = ("squad", qa.name, len(qa))
        else:
            if kind == "restaurants":
                ds = make_restaurant_dataset(
                    int(n or 500),
                    seed=seed,
                    bare_number_fraction=float(self.option(options, config, "bare_fraction", 0.25)),
                    name=name or "synthetic_restaurants",
                )
            elif kind == "sized":
                family = self.option(options, config, "family")
                if not family:
                    raise fail("missing-argument", "--family is required for --kind sized")
                ds = make_sized_dataset(family, seed=seed, split=self.option(options, config, "split", "train"))
            else:
                ds = make_audit_fixture(seed=seed)
            data = dumps_pretty(dump_sl(ds)).encode("utf-8")
            record = ("sl", ds.name, len(ds))

        atomic_write_bytes(output, data)
        record_snapshot(record[0], record[1], Path(output), data, record[2], "make_synthetic",
                        {"kind": kind, "seed": seed})
        self.stdout.write(self.style.SUCCESS(f"{kind}: {record[2]} records written to {output}"))
