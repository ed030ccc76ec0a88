from pathlib import Path

from corpus.management.base import QaslCommand, fail
from corpus.utils import atomic_write_json
from modeling.checkpoint import load_checkpoint, save_checkpoint
from modeling.ledger import finish_training_run, start_training_run
from modeling.schedule import file_corpus_loader, load_plan, run_schedule
from modeling.span_model import build_model, select_trainable


class Command(QaslCommand):
    help = "Run a stage schedule (Stage 1 / 1a+1b / Stage 2) and write a checkpoint"

    def add_command_arguments(self, parser):
        parser.add_argument("--schedule", type=str, help="Schedule config (JSON)")
        parser.add_argument("--out", dest="output", type=str, help="Checkpoint path")
        parser.add_argument("--init", type=str, default=None, help="Start from this checkpoint")
        parser.add_argument("--report", type=str, default=None,
                            help="TrainReport JSON path (default <out>.report.json)")
        parser.add_argument("--trainable-only", dest="trainable_only", action="store_true", default=None,
                            help="Store only the last stage's trainable tensors (needs --init as base)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        schedule_path = self.config_path(config, self.option(options, config, "schedule"))
        output = self.config_path(config, self.option(options, config, "output"))
        if not schedule_path or not output:
            raise fail("missing-argument", "--schedule and --out are required")

        plan = load_plan(schedule_path)
        seed = int(self.option(options, config, "seed", plan.seed))
        init = self.config_path(config, self.option(options, config, "init")) or plan.init_checkpoint
        trainable_only = bool(self.option(options, config, "trainable_only", False))
        if trainable_only and not init:
            raise fail("missing-argument", "--trainable-only needs an --init base checkpoint")
        report_path = self.config_path(config, self.option(options, config, "report")) or f"{output}.report.json"

        if init:
            model, _ = load_checkpoint(init)
        else:
            model = build_model(plan.model, seed=seed)

        run = start_training_run(str(schedule_path), {"schedule": str(schedule_path), "model": plan.model.to_dict()}, seed)
        self.stdout.write(self.style.WARNING(f"=== Training: {len(plan.schedule)} stage(s), seed {seed} ==="))
        try:
            model, reports = run_schedule(model, plan.schedule, seed, file_corpus_loader(plan.schedule))
        except Exception as exc:
            finish_training_run(run, [], error=str(exc))
            raise

        last = plan.schedule.entries[-1].config
        mask = select_trainable(model, last.regime, bitfit_all_biases=last.bitfit_all_biases)
        for report in reports:
            report.checkpoint = str(output)
            self.stdout.write(
                f"  {report.stage_label}: {report.steps} steps, final loss "
                f"{report.final_loss if report.final_loss is not None else 'n/a'}, "
                f"{report.trainable_parameters} trainable parameters"
            )
        save_checkpoint(
            output,
            model,
            mask=mask,
            reports=[r.to_dict() for r in reports],
            reformulation={
                "mode": plan.schedule.mode.value,
                "use_requested": plan.schedule.use_requested,
                "no_answer_threshold": last.no_answer_threshold,
            },
            trainable_only=trainable_only,
            base=init,
        )
        atomic_write_json(report_path, {
            "seed": seed,
            "checkpoint": str(output),
            "stages": [r.to_dict() for r in reports],
        })
        finish_training_run(run, reports, checkpoint_path=str(output))
        self.stdout.write(self.style.SUCCESS(f"Checkpoint written to {Path(output)}"))
