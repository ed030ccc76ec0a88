"""
Base class for the toolkit's management commands.

Every command:
- accepts --seed and --config (a JSON file whose keys fill in options the
  command line left unset)
- turns domain errors into CommandError carrying a JSON object
  {"error": kind, "message": text, "details": [...]}
- when run from the command line, writes only that JSON to stderr and exits 1
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Optional

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError, handle_default_options
from django.db import connections

from corpus.exceptions import QaslError
from corpus.utils import read_json


def error_payload(kind: str, message: str, details: Optional[list] = None) -> str:
    return json.dumps({"error": kind, "message": message, "details": details or []}, ensure_ascii=False)


def fail(kind: str, message: str, details: Optional[list] = None) -> CommandError:
    return CommandError(error_payload(kind, message, details))


class QaslCommand(BaseCommand):
    def add_arguments(self, parser):
        parser.add_argument("--seed", type=int, default=None, help="Random seed (default 0)")
        parser.add_argument("--config", type=str, default=None, help="JSON config file")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    # -- config -------------------------------------------------------------

    def load_config(self, options) -> dict:
        path = options.get("config")
        if not path:
            return {}
        try:
            data = read_json(path)
        except json.JSONDecodeError as exc:
            raise fail(
                "invalid-config",
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            ) from exc
        if not isinstance(data, dict):
            raise fail("invalid-config", f"{path}: top level must be an object")
        data["__dir__"] = str(Path(path).resolve().parent)
        return data

    @staticmethod
    def option(options, config: dict, name: str, default: Any = None) -> Any:
        """Command-line value, else config-file value, else default."""
        value = options.get(name)
        if value is not None:
            return value
        return config.get(name, default)

    @staticmethod
    def config_path(config: dict, value: Optional[str]) -> Optional[str]:
        """Resolve a path taken from a config file against the file's directory."""
        if value is None or "__dir__" not in config or Path(value).is_absolute():
            return value
        return str(Path(config["__dir__"]) / value)

    def seed(self, options, config: dict) -> int:
        return int(self.option(options, config, "seed", 0))

    # -- error handling -----------------------------------------------------

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except CommandError:
            raise
        except QaslError as exc:
            raise fail(exc.kind, exc.message, exc.details) from exc
        except ValidationError as exc:
            raise fail("validation-error", "; ".join(exc.messages[:3]), exc.messages) from exc
        except FileNotFoundError as exc:
            raise fail("file-not-found", f"File not found: {exc.filename}") from exc
        except OSError as exc:
            raise fail("io-error", str(exc)) from exc
        except ValueError as exc:
            raise fail("invalid-value", str(exc)) from exc

    def run_from_argv(self, argv):
        self._called_from_command_line = True
        parser = self.create_parser(argv[0], argv[1])
        options = parser.parse_args(argv[2:])
        cmd_options = vars(options)
        args = cmd_options.pop("args", ())
        handle_default_options(options)
        try:
            self.execute(*args, **cmd_options)
        except CommandError as exc:
            message = str(exc)
            try:
                json.loads(message)
            except ValueError:
                message = error_payload("command-error", message)
            sys.stderr.write(message + "\n")
            sys.exit(exc.returncode)
        finally:
            connections.close_all()
