"""CPLEX LP text export and import for :class:`~nsplace.milp.MilpModel`,
plus ``name value`` solution files from external solvers."""
from __future__ import annotations

import math
import re

import numpy as np

from .milp import MilpModel

_SENSE_OUT = {"L": "<=", "G": ">=", "E": "="}
_SENSE_IN = {"<=": "L", "=<": "L", "<": "L", ">=": "G", "=>": "G", ">": "G", "=": "E"}
_TERMS_PER_LINE = 6


def _coef(v):
    return repr(float(v))


def _expr(terms, names):
    parts = []
    for k, c in terms:
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_coef(abs(c))} {names[k]}")
    if not parts:
        return ["0 " + names[0]] if names else ["0"]
    return [" ".join(parts[i:i + _TERMS_PER_LINE]) for i in range(0, len(parts), _TERMS_PER_LINE)]


def _bound(v):
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return _coef(v)


def export_lp(model):
    """The model as CPLEX LP text with Minimize, Subject To, Bounds and
    Binaries sections."""
    names = model.names
    out = ["\\ placement legalization model", "Minimize"]
    obj = [(k, c) for k, c in enumerate(model.obj) if c != 0.0]
    lines = _expr(obj, names)
    out.append(" obj: " + lines[0])
    out.extend("   " + line for line in lines[1:])
    out.append("Subject To")
    for name, row, sense, rhs in zip(model.row_names, model.rows, model.sense, model.rhs):
        lines = _expr(sorted(row.items()), names)
        out.append(f" {name}: " + lines[0])
        out.extend("   " + line for line in lines[1:])
        out[-1] += f" {_SENSE_OUT[sense]} {_coef(rhs)}"
    out.append("Bounds")
    for k, name in enumerate(names):
        if model.binary[k]:
            continue
        lo, hi = model.lb[k], model.ub[k]
        if lo == hi:
            out.append(f" {name} = {_coef(lo)}")
        else:
            out.append(f" {_bound(lo)} <= {name} <= {_bound(hi)}")
    out.append("Binaries")
    bins = [names[k] for k in np.flatnonzero(model.binary)]
    for i in range(0, len(bins), 8):
        out.append(" " + " ".join(bins[i:i + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


_SECTION = re.compile(
    r"^\s*(minimize|minimum|min|maximize|maximum|max|subject\s+to|such\s+that|st|s\.t\.|"
    r"bounds?|binary|binaries|bin|generals?|end)\s*$", re.I)
_TOKEN = re.compile(r"[<>=]+|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]|[^\s<>=+-]+")


def _sections(text):
    sec, buf = None, {}
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            word = m.group(1).lower().replace(" ", "")
            sec = {"minimize": "obj", "minimum": "obj", "min": "obj", "maximize": "max",
                   "maximum": "max", "max": "max", "subjectto": "st", "suchthat": "st", "st": "st",
                   "s.t.": "st", "bound": "bounds", "bounds": "bounds", "binary": "bin",
                   "binaries": "bin", "bin": "bin", "general": "gen", "generals": "gen",
                   "end": "end"}[word]
            buf.setdefault(sec, [])
            continue
        if sec is None:
            raise ValueError(f"text before the objective section: {line!r}")
        buf[sec].append(line)
    return buf


def _parse_linear(tokens):
    """Tokens ``[+|-] [coef] name ...`` -> list of (coef, name)."""
    terms, sign, coef = [], 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            coef = float(tok)
            continue
        except ValueError:
            pass
        terms.append((sign * (1.0 if coef is None else coef), tok))
        sign, coef = 1.0, None
    return terms


def _statements(lines):
    """Join continuation lines: a new statement starts at ``name:``."""
    stmts = []
    for line in lines:
        if re.match(r"^[A-Za-z_][\w.\[\]]*\s*:", line) or not stmts:
            stmts.append(line)
        else:
            stmts[-1] += " " + line
    return stmts


def _num(tok):
    t = tok.lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _is_num(tok):
    try:
        _num(tok)
        return True
    except ValueError:
        return False


def _parse_bound(line):
    """``(name, lower or None, upper or None)`` for one Bounds line."""
    toks = re.sub(r"(<=|>=|=<|=>|=)", r" \1 ", line).split()
    if len(toks) == 2 and toks[1].lower() == "free":
        return toks[0], -math.inf, math.inf
    if len(toks) == 5 and toks[1] in ("<=", "=<") and toks[3] in ("<=", "=<"):
        return toks[2], _num(toks[0]), _num(toks[4])
    if len(toks) == 3:
        a, op, b = toks
        if op == "=":
            return a, _num(b), _num(b)
        upper = op in ("<=", "=<")
        if _is_num(a) and not _is_num(b):
            a, b, upper = b, a, not upper
        return (a, None, _num(b)) if upper else (a, _num(b), None)
    raise ValueError(f"unrecognized bound line {line!r}")


def parse_lp(text, design=None):
    """Rebuild a :class:`MilpModel` from LP text.

    When ``design`` is given, component variables named ``x<i>``, ``y<i>``,
    ``r<i>`` and pair binaries ``p<i>_<j>``, ``q<i>_<j>`` are mapped back so
    solutions can be turned into placements.
    """
    sec = _sections(text)
    if "max" in sec:
        raise ValueError("only minimization models are supported")
    names, index = [], {}

    def var(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    obj_terms = []
    for stmt in _statements(sec.get("obj", [])):
        body = stmt.split(":", 1)[1] if ":" in stmt else stmt
        obj_terms += _parse_linear(_TOKEN.findall(body))
    rows, sense, rhs, row_names = [], [], [], []
    for n, stmt in enumerate(_statements(sec.get("st", []))):
        if ":" in stmt:
            rname, body = stmt.split(":", 1)
            rname = rname.strip()
        else:
            rname, body = f"c{n}", stmt
        toks = _TOKEN.findall(body)
        ops = [i for i, t in enumerate(toks) if t in _SENSE_IN]
        if len(ops) != 1:
            raise ValueError(f"constraint {rname!r} needs exactly one comparison")
        op = ops[0]
        rhs_toks = toks[op + 1:]
        value = float("".join(rhs_toks))
        row = {}
        for c, name in _parse_linear(toks[:op]):
            k = var(name)
            row[k] = row.get(k, 0.0) + c
        rows.append(row)
        sense.append(_SENSE_IN[toks[op]])
        rhs.append(value)
        row_names.append(rname)
    for c, name in obj_terms:
        var(name)
    bounds = {}
    for line in sec.get("bounds", []):
        name, lo, hi = _parse_bound(line)
        var(name)
        old = bounds.get(name, (0.0, math.inf))
        bounds[name] = (old[0] if lo is None else lo, old[1] if hi is None else hi)
    binaries = set()
    for line in sec.get("bin", []):
        for name in line.split():
            var(name)
            binaries.add(name)
    if sec.get("gen"):
        raise ValueError("general integer variables are not supported")
    nv = len(names)
    lb, ub = np.zeros(nv), np.full(nv, math.inf)
    binary = np.zeros(nv, dtype=bool)
    for name, (lo, hi) in bounds.items():
        lb[index[name]], ub[index[name]] = lo, hi
    for name in binaries:
        k = index[name]
        binary[k] = True
        lb[k], ub[k] = 0.0, 1.0
    obj = np.zeros(nv)
    for c, name in obj_terms:
        obj[index[name]] += c
    model = MilpModel(names, lb, ub, binary, obj, rows, sense, rhs, row_names)
    if design is not None:
        _attach(model, design, index)
    return model


def _attach(model, design, index):
    n = design.n
    cv = np.zeros((n, 3), dtype=np.intp)
    for i in range(n):
        cv[i] = [index[f"x{i}"], index[f"y{i}"], index[f"r{i}"]]
    model.design = design
    model.comp_vars = cv
    for name, k in index.items():
        m = re.fullmatch(r"p(\d+)_(\d+)", name)
        if m:
            ij = (int(m.group(1)), int(m.group(2)))
            model.pair_vars[ij] = (k, index[f"q{ij[0]}_{ij[1]}"])


def export_solution(model, values):
    """``name value`` lines for a solution vector."""
    return "".join(f"{n} {repr(float(v))}\n" for n, v in zip(model.names, values))


def parse_solution(text, model):
    """Solution vector from ``name value`` lines; unnamed variables are 0."""
    v = np.zeros(model.num_vars)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ValueError(f"line {lineno}: expected 'name value'")
        try:
            v[model.index(toks[0])] = float(toks[1])
        except KeyError:
            raise ValueError(f"line {lineno}: unknown variable {toks[0]!r}") from None
    return v


def import_solution(text, model):
    """Placement from an external solver's ``name value`` output."""
    return model.placement(parse_solution(text, model))
