"""Versioned prompt catalog.

Templates live as UTF-8 text assets next to this module, one file per
template id, and are loaded once at import of the consuming module.
Substitution is literal token replacement (``{slot}`` -> value), never
``str.format``, so template bodies and slot values may contain braces.
"""

from __future__ import annotations

from importlib import resources

TEMPLATE_IDS = ("qa_gen_v1", "role_v1", "flow_v1", "summary_v1")

_cache: dict[str, str] = {}


def load_template(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise KeyError(f"unknown template id: {template_id}")
    if template_id not in _cache:
        _cache[template_id] = (
            resources.files(__package__).joinpath(f"{template_id}.txt").read_text("utf-8")
        )
    return _cache[template_id]


def render(template: str, slots: dict[str, str]) -> str:
    """Replace each ``{name}`` token with its value, literally."""
    out = template
    for name, value in slots.items():
        out = out.replace("{" + name + "}", value)
    return out
