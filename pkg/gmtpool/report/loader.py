from __future__ import annotations

"""Template loader for ``*.svg.j2`` files.

Each file starts with YAML front-matter declaring

- name: unique template identifier (defaults to the file stem)
- description: short human friendly description
- arguments: list with ``name`` / ``description`` / ``required`` fields

and the remainder is a Jinja2 body rendered with those arguments.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import yaml  # PyYAML
from jinja2 import StrictUndefined, Template
from loguru import logger

from gmtpool.errors import UsageError

# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass
class TemplateArgument:
    name: str
    description: str = ""
    required: bool = True

    def dict(self) -> Dict[str, Any]:  # noqa: D401 – simple method
        return {"name": self.name, "description": self.description, "required": self.required}


@dataclass
class SvgTemplate:
    """In-memory representation of one template file."""

    name: str
    description: str
    arguments: List[TemplateArgument]
    template_source: str
    _template: Template = field(init=False, repr=False)

    def __post_init__(self) -> None:  # noqa: D401 – lifecycle hook
        self._template = Template(self.template_source, autoescape=True, undefined=StrictUndefined)

    def render(self, **kwargs: Any) -> str:
        """Render with *kwargs*; a missing required argument is a :class:`UsageError`."""
        missing = [arg.name for arg in self.arguments if arg.required and arg.name not in kwargs]
        if missing:
            raise UsageError(
                f"template {self.name!r} is missing required argument(s): {', '.join(missing)}",
                data={"template": self.name, "missing": missing},
            )
        defaults = {arg.name: None for arg in self.arguments if not arg.required}
        return self._template.render(**{**defaults, **kwargs})

    def dict(self) -> Dict[str, Any]:  # noqa: D401 – simple method
        return {
            "name": self.name,
            "description": self.description,
            "arguments": [arg.dict() for arg in self.arguments],
        }


# ---------------------------------------------------------------------------
# Loader helpers
# ---------------------------------------------------------------------------

_FRONT_MATTER_RE = re.compile(r"^---\s*\n(.*?)\n---\s*\n", re.DOTALL)
_SUFFIX = ".svg.j2"


def parse_template(path: Path) -> SvgTemplate:
    text = path.read_text(encoding="utf-8")
    match = _FRONT_MATTER_RE.match(text)
    if not match:
        raise ValueError("Missing YAML front-matter")

    meta = yaml.safe_load(match.group(1)) or {}
    arguments = [
        TemplateArgument(
            name=arg.get("name"),
            description=arg.get("description", ""),
            required=bool(arg.get("required", True)),
        )
        for arg in meta.get("arguments", [])
    ]
    return SvgTemplate(
        name=meta.get("name") or path.name[: -len(_SUFFIX)],
        description=meta.get("description", ""),
        arguments=arguments,
        template_source=text[match.end() :],
    )


def load_templates(directory: str | Path) -> Dict[str, SvgTemplate]:
    """Load every ``*.svg.j2`` file in *directory* into a ``name → SvgTemplate`` dict."""
    dir_path = Path(directory)
    if not dir_path.exists():
        raise FileNotFoundError(f"Template directory '{dir_path}' does not exist.")

    templates: Dict[str, SvgTemplate] = {}
    for file_path in sorted(dir_path.glob(f"*{_SUFFIX}")):
        try:
            tmpl = parse_template(file_path)
        except Exception as exc:
            logger.warning("Skipping template file '{}': {}", file_path, exc)
            continue
        templates[tmpl.name] = tmpl
    return templates
