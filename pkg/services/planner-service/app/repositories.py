"""
Repository layer for planner service: run configs in, result tables out
"""
import csv
import io
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pydantic import ValidationError

from app.config import settings
from app.models import RunConfig
from shared.common.errors import ConfigError

# Execution-only keys that must not change the bytes of a result file
HEADER_EXCLUDED_KEYS = {"threads", "output_path"}


class RunConfigRepository:
    """Repository for flat key = value run configurations"""

    @staticmethod
    def parse_text(text: str, source: str = "<config>") -> Dict[str, str]:
        """Parse `key = value` lines; '#' starts a comment, blank lines are skipped"""
        values: Dict[str, str] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{source}:{line_no}: expected 'key = value'",
                    error_code="config_syntax",
                    details={"line": line_no, "text": raw.strip()},
                )
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(
                    f"{source}:{line_no}: missing key",
                    error_code="config_syntax",
                    details={"line": line_no},
                )
            if key in values:
                raise ConfigError(
                    f"{source}:{line_no}: duplicate key '{key}'",
                    error_code="config_duplicate",
                    details={"line": line_no, "key": key},
                )
            values[key] = value
        return values

    @staticmethod
    def load(path: str) -> Dict[str, str]:
        """Read and parse a config file"""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config file {path}: {e.strerror}", error_code="config_io",
                              details={"path": path})
        return RunConfigRepository.parse_text(text, source=path)

    @staticmethod
    def parse_header(text: str) -> Dict[str, str]:
        """Recover the effective configuration from a result file's '# key = value' header"""
        lines = []
        for raw in text.splitlines():
            if not raw.startswith("#"):
                break
            lines.append(raw[1:])
        values = RunConfigRepository.parse_text("\n".join(lines), source="<header>")
        values.pop("command", None)
        return values

    @staticmethod
    def build(values: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """Validate file values plus CLI overrides (None means not given) into a RunConfig"""
        merged = dict(values)
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return RunConfig(**merged)
        except ValidationError as e:
            problems = []
            keys = []
            for err in e.errors():
                key = ".".join(str(part) for part in err["loc"]) or "<config>"
                keys.append(key)
                problems.append(f"key '{key}': {err['msg']}")
            raise ConfigError(
                "Invalid configuration: " + "; ".join(problems),
                error_code="config_invalid",
                details={"keys": ",".join(keys)},
            )


def format_value(value: Any) -> str:
    """Deterministic text form of one CSV cell or header value"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


class ResultRepository:
    """Repository for delimiter-separated result tables"""

    @staticmethod
    def header_lines(command: str, config: RunConfig) -> List[str]:
        """'# key = value' lines for the effective configuration, sorted by key"""
        lines = [f"# command = {command}"]
        for key, value in sorted(config.model_dump().items()):
            if key in HEADER_EXCLUDED_KEYS or value is None:
                continue
            lines.append(f"# {key} = {format_value(value)}")
        return lines

    @staticmethod
    def render(command: str, config: RunConfig, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        buffer = io.StringIO()
        for line in ResultRepository.header_lines(command, config):
            buffer.write(line + "\n")
        writer = csv.writer(buffer, delimiter=settings.csv_delimiter, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()

    @staticmethod
    def write_table(
        command: str,
        config: RunConfig,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        path: Optional[str] = None,
    ) -> None:
        """Write to `path`, or to stdout when no path is given"""
        text = ResultRepository.render(command, config, columns, rows)
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise ConfigError(f"Cannot write output file {path}: {e.strerror}", error_code="output_io",
                              details={"path": path})
