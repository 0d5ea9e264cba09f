"""Minimal Verilog-2001 well-formedness checks for emitted files.

Not a real parser: enough structure to catch the common emission bugs —
unbalanced blocks, references to undeclared signals, malformed literals.
An external linter replaces this when one is installed (see
test_acceptance.py).
"""

from __future__ import annotations

import re

KEYWORDS = {
    "module",
    "endmodule",
    "input",
    "output",
    "inout",
    "reg",
    "wire",
    "integer",
    "parameter",
    "localparam",
    "assign",
    "always",
    "posedge",
    "negedge",
    "begin",
    "end",
    "if",
    "else",
    "for",
    "case",
    "endcase",
    "default",
}

_BASED_LITERAL = re.compile(r"\d*\s*'\s*[bdhoBDHO][0-9a-fA-F_xXzZ]+")
_STRINGS = re.compile(r'"(?:[^"\\]|\\.)*"')
_COMMENTS = re.compile(r"//[^\n]*")
_SYSTEM_TASK = re.compile(r"\$\w+")
_DOT_CONNECT = re.compile(r"\.\s*\w+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_DECL = re.compile(
    r"^\s*(?:input|output|inout|reg|wire|integer)\b(?:\s*\[[^\]]+\])?\s*"
    r"([A-Za-z_][A-Za-z0-9_]*)",
    re.MULTILINE,
)
_ARRAY_DECL = re.compile(
    r"^\s*reg\s*(?:\[[^\]]+\])?\s*([A-Za-z_][A-Za-z0-9_]*)\s*\[", re.MULTILINE
)
_MODULE_HEADER = re.compile(r"\bmodule\s+([A-Za-z_][A-Za-z0-9_]*)")
_PARAM_DECL = re.compile(
    r"^\s*(?:parameter|localparam)\s+([A-Za-z_][A-Za-z0-9_]*)", re.MULTILINE
)
_INSTANCE = re.compile(
    r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s+(?:#\s*\([^;]*?\)\s*)?"
    r"([A-Za-z_][A-Za-z0-9_]*)\s*\(",
    re.MULTILINE,
)


def check_verilog(text: str, known_modules: set[str] = frozenset()) -> list[str]:
    """Return a list of problems (empty means the file looks well formed)."""
    problems: list[str] = []
    body = _COMMENTS.sub(" ", _STRINGS.sub('""', text))

    if body.count("module") and not body.count("endmodule"):
        problems.append("missing endmodule")
    begins = len(re.findall(r"\bbegin\b", body))
    ends = len(re.findall(r"\bend\b", body))
    if begins != ends:
        problems.append(f"unbalanced begin/end: {begins} vs {ends}")
    if body.count("(") != body.count(")"):
        problems.append("unbalanced parentheses")
    if body.count("[") != body.count("]"):
        problems.append("unbalanced brackets")

    declared: set[str] = set(KEYWORDS)
    header = _MODULE_HEADER.search(body)
    if not header:
        return problems + ["no module header"]
    declared.add(header.group(1))
    # Header port list.
    header_end = body.index(";", header.end())
    declared.update(_IDENT.findall(body[header.end() : header_end]))
    for match in _DECL.finditer(body):
        declared.add(match.group(1))
    for match in _PARAM_DECL.finditer(body):
        declared.add(match.group(1))
    for match in _ARRAY_DECL.finditer(body):
        declared.add(match.group(1))
    for match in _INSTANCE.finditer(body):
        mod_name, inst_name = match.groups()
        if mod_name in KEYWORDS or inst_name in KEYWORDS:
            continue
        if mod_name not in known_modules and mod_name not in declared:
            problems.append(f"instantiation of unknown module {mod_name!r}")
        declared.add(mod_name)
        declared.add(inst_name)

    stripped = _DOT_CONNECT.sub(" ", _SYSTEM_TASK.sub(" ", _BASED_LITERAL.sub(" 0 ", body)))
    for ident in set(_IDENT.findall(stripped)):
        if ident not in declared:
            problems.append(f"reference to undeclared identifier {ident!r}")
    return problems
