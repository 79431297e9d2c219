"""Document templates: layouts, field formats, reference textures.

Three built-in templates emulate distinct regional ID formats. A template
fixes where each field sits on the fixed-width text grid, the format
pattern its value must match, and the reference background texture an
authentic document is printed on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

GRID_WIDTH = 40
GRID_HEIGHT = 10

REQUIRED_FIELDS = ("name", "dob", "id_number", "address")

FIELD_LABELS = {
    "name": "NAME:",
    "dob": "DOB:",
    "id_number": "ID NO:",
    "address": "ADDRESS:",
}

FIELD_FORMATS = {
    "name": r"^[A-Z][A-Z ]{2,30}$",
    "dob": r"^\d{4}-\d{2}-\d{2}$",
    "id_number": r"^\d{9}$",
    "address": r"^\d+ [A-Z][A-Z0-9 ]+$",
}


@dataclass(frozen=True)
class TemplateSpec:
    template_id: str
    field_layout: dict[str, tuple[int, int, int]]  # field -> (row, col, width)
    field_formats: dict[str, str]
    reference_texture: tuple[float, ...]

    def compiled_formats(self) -> dict[str, re.Pattern]:
        return {f: re.compile(p) for f, p in self.field_formats.items()}


def _spec(template_id: str, rows: dict[str, int], col: int, texture: tuple[float, ...]) -> TemplateSpec:
    layout = {
        "name": (rows["name"], col, 22),
        "dob": (rows["dob"], col, 10),
        "id_number": (rows["id_number"], col, 9),
        "address": (rows["address"], col, 26),
    }
    return TemplateSpec(
        template_id=template_id,
        field_layout=layout,
        field_formats=dict(FIELD_FORMATS),
        reference_texture=texture,
    )


BUILTIN_TEMPLATES: dict[str, TemplateSpec] = {
    t.template_id: t
    for t in (
        _spec(
            "TPL-A",
            rows={"name": 1, "dob": 3, "id_number": 5, "address": 7},
            col=10,
            texture=(0.62, 0.31, 0.85, 0.12, 0.44, 0.73, 0.28, 0.57),
        ),
        _spec(
            "TPL-B",
            rows={"name": 2, "dob": 4, "id_number": 6, "address": 8},
            col=12,
            texture=(0.15, 0.78, 0.33, 0.91, 0.26, 0.49, 0.67, 0.08),
        ),
        _spec(
            "TPL-C",
            rows={"name": 1, "dob": 4, "id_number": 6, "address": 8},
            col=11,
            texture=(0.81, 0.22, 0.55, 0.38, 0.93, 0.17, 0.46, 0.70),
        ),
    )
}


def load_templates_json(path: str) -> dict[str, TemplateSpec]:
    """Load a template registry from a templates.json file.

    Schema per entry: {"template_id", "field_layout": {field: [row, col,
    width]}, "field_formats": {field: pattern}, "reference_texture": [8
    reals]}.
    """
    import json

    with open(path) as fh:
        raw = json.load(fh)
    registry = {}
    for entry in raw:
        spec = TemplateSpec(
            template_id=entry["template_id"],
            field_layout={f: tuple(v) for f, v in entry["field_layout"].items()},
            field_formats=dict(entry.get("field_formats", FIELD_FORMATS)),
            reference_texture=tuple(entry["reference_texture"]),
        )
        for fld in REQUIRED_FIELDS:
            if fld not in spec.field_layout:
                raise ValueError(f"template {spec.template_id} missing field {fld}")
        registry[spec.template_id] = spec
    return registry


def render_document(
    template: TemplateSpec,
    values: dict[str, str],
    offsets: dict[str, tuple[int, int]],
) -> tuple[str, ...]:
    """Render field values onto the template grid, applying layout offsets."""
    grid = [" " * GRID_WIDTH for _ in range(GRID_HEIGHT)]
    header = f"IDENTITY CARD {template.template_id}"
    grid[0] = header[:GRID_WIDTH].ljust(GRID_WIDTH)
    for fld in REQUIRED_FIELDS:
        row, col, _width = template.field_layout[fld]
        dr, dc = offsets.get(fld, (0, 0))
        r = min(max(row + dr, 0), GRID_HEIGHT - 1)
        label = FIELD_LABELS[fld]
        start = max(col + dc, len(label) + 1)
        line = label.ljust(start) + values[fld]
        grid[r] = line[:GRID_WIDTH].ljust(GRID_WIDTH)
    return tuple(grid)
