"""
Sectioned key = value run configuration.

The text is read with configparser and validated section by section through the
pydantic models in models.py. render_config writes every field back out with
17 significant digits so parse_config(render_config(c)) == c.
"""
import configparser
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import ValidationError

from .errors import ParseError
from .models import RunConfig

logger = logging.getLogger(__name__)

SECTIONS = tuple(RunConfig.model_fields)


def _line_map(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """First line number of every section header and of every key inside a section."""
    lines: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            lines.setdefault((section, None), number)
        elif section is not None and "=" in line:
            lines.setdefault((section, line.split("=", 1)[0].strip()), number)
    return lines


def _clean_message(msg: str) -> str:
    for prefix in ("Value error, ", "Assertion failed, "):
        if msg.startswith(prefix):
            return msg[len(prefix):]
    return msg


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; every failure is a ParseError naming key and line."""
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as e:
        raise ParseError("duplicate key", key=f"{e.section}.{e.option}", line=e.lineno) from e
    except configparser.DuplicateSectionError as e:
        raise ParseError("duplicate section", key=e.section, line=e.lineno) from e
    except configparser.MissingSectionHeaderError as e:
        raise ParseError("key outside any section", key=e.line.split("=", 1)[0].strip(), line=e.lineno) from e
    except configparser.Error as e:
        raise ParseError(f"malformed config: {e}") from e

    lines = _line_map(text)
    if parser.defaults():
        raise ParseError("the DEFAULT section is not supported", key="DEFAULT", line=lines.get(("DEFAULT", None)))
    raw = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ParseError("unknown section", key=section, line=lines.get((section, None)))
        raw[section] = dict(parser[section].items())

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        loc = err["loc"]
        section = str(loc[0]) if loc else None
        key = str(loc[1]) if len(loc) > 1 and isinstance(loc[1], str) else None
        msg = "unknown key" if err["type"] == "extra_forbidden" else _clean_message(err["msg"])
        name = f"{section}.{key}" if key else section
        line = lines.get((section, key)) or lines.get((section, None))
        raise ParseError(msg, key=name, line=line) from e
    logger.debug("Parsed config with sections %s", ", ".join(raw) or "(defaults)")
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(v) for v in value)
    return str(value)


def render_config(config: RunConfig) -> str:
    """Config text that parses back to an equal RunConfig."""
    out = []
    for name in SECTIONS:
        section = getattr(config, name)
        if section is None:
            continue
        out.append(f"[{name}]")
        for key in type(section).model_fields:
            out.append(f"{key} = {_format(getattr(section, key))}")
        out.append("")
    return "\n".join(out)
