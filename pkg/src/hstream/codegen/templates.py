"""String-template groups: external text files with named $hole$ templates.

Group file syntax, one entry per template::

    name(arg, other) ::= "single line with $arg$ holes"
    name(arg) ::= <<
    multi-line body with $arg$ holes
    >>

`$$` renders a literal dollar. When a hole's value is multi-line, continuation
lines are indented to the hole's column, so block bodies nest correctly.
Rendering is strict: every declared argument must be supplied, and templates
may only reference declared arguments (checked at load time).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_ENTRY_ONE_LINE = re.compile(r'^(\w+)\(([^)]*)\)\s*::=\s*"(.*)"\s*$')
_ENTRY_HEREDOC = re.compile(r"^(\w+)\(([^)]*)\)\s*::=\s*<<\s*$")
_HOLE = re.compile(r"\$\$|\$(\w+)\$")


@dataclass(frozen=True)
class Template:
    name: str
    args: tuple[str, ...]
    text: str


class TemplateGroup:
    def __init__(self, name: str, templates: dict[str, Template]):
        self.name = name
        self.templates = templates

    @classmethod
    def parse(cls, name: str, text: str) -> "TemplateGroup":
        templates: dict[str, Template] = {}
        lines = text.splitlines()
        i = 0
        while i < len(lines):
            line = lines[i]
            i += 1
            if not line.strip() or line.lstrip().startswith("//"):
                continue
            m = _ENTRY_ONE_LINE.match(line)
            if m:
                templates[m.group(1)] = _make_template(name, m)
                continue
            m = _ENTRY_HEREDOC.match(line)
            if m:
                body: list[str] = []
                while i < len(lines) and lines[i].rstrip() != ">>":
                    body.append(lines[i])
                    i += 1
                if i >= len(lines):
                    raise ValueError(f"{name}: template '{m.group(1)}' has no closing >>")
                i += 1
                templates[m.group(1)] = _make_template(name, m, "\n".join(body))
                continue
            raise ValueError(f"{name}: cannot parse template line: {line!r}")
        return cls(name, templates)

    def render(self, template_name: str, **values: object) -> str:
        tpl = self.templates.get(template_name)
        if tpl is None:
            raise KeyError(f"{self.name}: no template named '{template_name}'")
        missing = set(tpl.args) - values.keys()
        if missing:
            raise KeyError(f"{self.name}.{template_name}: missing arguments {sorted(missing)}")
        extra = values.keys() - set(tpl.args)
        if extra:
            raise KeyError(f"{self.name}.{template_name}: unknown arguments {sorted(extra)}")

        out_lines: list[str] = []
        for line in tpl.text.split("\n"):
            out_lines.append(_render_line(line, values))
        return "\n".join(out_lines)


def _make_template(group: str, m: re.Match, body: str | None = None) -> Template:
    name = m.group(1)
    args = tuple(a.strip() for a in m.group(2).split(",") if a.strip())
    text = m.group(3) if body is None else body
    used = {h for h in (_hole_name(tok) for tok in _HOLE.findall(text)) if h}
    undeclared = used - set(args)
    if undeclared:
        raise ValueError(f"{group}: template '{name}' uses undeclared holes {sorted(undeclared)}")
    return Template(name, args, text)


def _hole_name(match_groups) -> str | None:
    # findall on a single-group regex yields the group string ('' for $$)
    return match_groups or None


def _render_line(line: str, values: dict[str, object]) -> str:
    out: list[str] = []
    pos = 0
    for m in _HOLE.finditer(line):
        out.append(line[pos:m.start()])
        if m.group(0) == "$$":
            out.append("$")
        else:
            value = str(values[m.group(1)])
            if "\n" in value:
                built = "".join(out)
                column = len(built[built.rfind("\n") + 1:].expandtabs())
                value = value.replace("\n", "\n" + " " * column)
            out.append(value)
        pos = m.end()
    out.append(line[pos:])
    return "".join(out)


@lru_cache(maxsize=None)
def load_group(name: str) -> TemplateGroup:
    """Load a template group shipped under hstream/codegen/templates/<name>.st."""
    path = resources.files("hstream.codegen").joinpath(f"templates/{name}.st")
    return TemplateGroup.parse(name, path.read_text(encoding="utf-8"))
