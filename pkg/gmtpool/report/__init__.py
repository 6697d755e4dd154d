"""Report rendering: SVG templates, CSV writers and run provenance.

Templates live in ``templates/`` next to this file; extra directories can be
merged with :func:`register_template_directory`.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from gmtpool.report.loader import SvgTemplate, load_templates
from gmtpool.report.svg import cluster_svg, overlay_svg  # noqa: F401
from gmtpool.report.writers import (  # noqa: F401
    RunRecord,
    git_describe,
    write_assignment,
    write_bench,
    write_coordinates,
    write_cross_objective,
    write_csv,
    write_folds,
    write_history,
    write_run_record,
    write_summary,
)

_TEMPLATES_PATH = Path(__file__).parent / "templates"
_template_cache: Optional[Dict[str, SvgTemplate]] = None


def _cache() -> Dict[str, SvgTemplate]:
    global _template_cache
    if _template_cache is None:
        _template_cache = load_templates(_TEMPLATES_PATH)
    return _template_cache


def register_template_directory(path: str | Path) -> None:  # noqa: D401 – public helper
    """Load all ``*.svg.j2`` files from *path* and merge them into the registry."""
    _cache().update(load_templates(Path(path)))


def list_templates() -> List[SvgTemplate]:
    return list(_cache().values())


def get_template(name: str) -> SvgTemplate:
    """Raises ``KeyError`` if the template does not exist."""
    return _cache()[name]


def render_template(name: str, arguments: Optional[Dict[str, Any]] = None) -> str:
    return get_template(name).render(**(arguments or {}))


def refresh() -> None:  # noqa: D401 – simple helper
    """Drop the cache; the next lookup re-reads the template directory."""
    global _template_cache
    _template_cache = None
