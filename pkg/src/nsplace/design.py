"""Design data model, the line-oriented design/placement file formats, and
pin geometry under orientation.

Coordinates are in millimetres.  A component's position is its lower-left
corner; orientation ``r=1`` is a single 90 degree counterclockwise rotation
that swaps the footprint to ``h x w``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DesignError(ValueError):
    """Malformed design or placement text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Board:
    width: float
    height: float
    num_layers: int = 1

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DesignError(f"board dimensions must be positive, got {self.width} x {self.height}")
        if self.num_layers < 1:
            raise DesignError("board needs at least one layer")


@dataclass(frozen=True)
class PinDef:
    id: str
    ox: float
    oy: float


@dataclass(frozen=True)
class Component:
    id: str
    width: float
    height: float
    fixed: bool = False
    fixed_position: tuple | None = None
    pins: tuple = ()

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DesignError(f"component {self.id!r} has nonpositive dimension")
        if self.fixed and self.fixed_position is None:
            raise DesignError(f"fixed component {self.id!r} lacks a position")

    @property
    def area(self):
        return self.width * self.height

    def pin(self, pin_id):
        for p in self.pins:
            if p.id == pin_id:
                return p
        raise KeyError(pin_id)


@dataclass(frozen=True)
class Net:
    id: str
    pins: tuple  # of (component id, pin id)


@dataclass(frozen=True)
class Design:
    board: Board
    components: tuple = ()
    nets: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for i, c in enumerate(self.components):
            if c.id in index:
                raise DesignError(f"duplicate component id {c.id!r}")
            index[c.id] = i
        object.__setattr__(self, "_index", index)
        net_ids = set()
        for net in self.nets:
            if net.id in net_ids:
                raise DesignError(f"duplicate net id {net.id!r}")
            net_ids.add(net.id)
            if not net.pins:
                raise DesignError(f"net {net.id!r} has no pins")
            for cid, pid in net.pins:
                if cid not in index:
                    raise DesignError(f"net {net.id!r} references unknown component {cid!r}")
                try:
                    self.components[index[cid]].pin(pid)
                except KeyError:
                    raise DesignError(
                        f"net {net.id!r} references unknown pin {cid}.{pid}") from None

    @property
    def n(self):
        return len(self.components)

    def index(self, comp_id):
        return self._index[comp_id]

    def component(self, comp_id):
        return self.components[self._index[comp_id]]

    @property
    def movable(self):
        return np.array([not c.fixed for c in self.components], dtype=bool)

    def dims(self):
        """(n, 2) array of unrotated (w, h)."""
        return np.array([[c.width, c.height] for c in self.components], dtype=float).reshape(-1, 2)

    def pin_table(self):
        """Flatten net pins into arrays.

        Returns ``(comp, offsets, net_ptr)`` where ``comp[k]`` is the component
        index of the k-th net pin, ``offsets[k]`` its unrotated offset and
        ``net_ptr`` the CSR row pointer over nets.
        """
        comp, offs, ptr = [], [], [0]
        for net in self.nets:
            for cid, pid in net.pins:
                i = self._index[cid]
                p = self.components[i].pin(pid)
                comp.append(i)
                offs.append((p.ox, p.oy))
            ptr.append(len(comp))
        return (np.array(comp, dtype=np.intp),
                np.array(offs, dtype=float).reshape(-1, 2),
                np.array(ptr, dtype=np.intp))


@dataclass
class Placement:
    """Per-component lower-left coordinates and orientation bits."""

    x: np.ndarray
    y: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).copy()
        self.y = np.asarray(self.y, dtype=float).copy()
        self.r = np.asarray(self.r, dtype=np.int8).copy()
        if not (self.x.shape == self.y.shape == self.r.shape):
            raise ValueError("placement arrays must have equal length")

    @classmethod
    def for_design(cls, design, x=None, y=None, r=None):
        n = design.n
        p = cls(np.zeros(n) if x is None else x,
                np.zeros(n) if y is None else y,
                np.zeros(n, dtype=np.int8) if r is None else r)
        return p.with_fixed(design)

    def copy(self):
        return Placement(self.x, self.y, self.r)

    def with_fixed(self, design):
        """Return a copy with fixed components snapped to their fixed positions."""
        p = self.copy()
        for i, c in enumerate(design.components):
            if c.fixed:
                fx, fy, fr = c.fixed_position
                p.x[i], p.y[i], p.r[i] = fx, fy, fr
        return p

    def __eq__(self, other):
        if not isinstance(other, Placement):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and np.array_equal(self.r, other.r))


def effective_dims(design, r):
    """(n, 2) footprint dims after orientation."""
    wh = design.dims()
    r = np.asarray(r, dtype=bool)
    out = wh.copy()
    out[r] = wh[r][:, ::-1]
    return out


LATTICE = 1e9
"""Lengths are compared on an integer lattice of this many units per mm."""


def to_lattice(v):
    """Round lengths in mm to int64 lattice units (1 nm).

    Floating-point sums such as ``3.1 + 2.2`` overshoot ``5.3`` by an ulp, so
    exact abutment cannot be tested in doubles.  On the lattice it can, and
    ``to_lattice(k / LATTICE) == k`` for every representable ``k``.
    """
    return np.rint(np.asarray(v, dtype=float) * LATTICE).astype(np.int64)


def rotate_offsets(offsets, heights, r):
    """Map unrotated pin offsets to offsets from the lower-left under ``r``."""
    offsets = np.asarray(offsets, dtype=float)
    out = offsets.copy()
    r = np.asarray(r, dtype=bool)
    if r.any():
        h = np.asarray(heights, dtype=float)
        out[r, 0] = h[r] - offsets[r, 1]
        out[r, 1] = offsets[r, 0]
    return out


def pin_position(placement, design, comp, pin):
    """Absolute (px, py) of ``pin`` on component ``comp`` (id or index)."""
    i = comp if isinstance(comp, (int, np.integer)) else design.index(comp)
    c = design.components[i]
    if isinstance(pin, str):
        pin = c.pin(pin)
    x, y = placement.x[i], placement.y[i]
    if placement.r[i]:
        return (x + c.height - pin.oy, y + pin.ox)
    return (x + pin.ox, y + pin.oy)


def pin_positions(design, placement, table=None):
    """Positions of every net pin, in the order of :meth:`Design.pin_table`."""
    comp, offs, _ = design.pin_table() if table is None else table
    if len(comp) == 0:
        return np.zeros((0, 2))
    h = design.dims()[:, 1]
    rel = rotate_offsets(offs, h[comp], placement.r[comp])
    return rel + np.column_stack([placement.x[comp], placement.y[comp]])


def design_stats(design, placement=None):
    area = sum(c.area for c in design.components)
    b = design.board
    return {
        "components": design.n,
        "locked": sum(c.fixed for c in design.components),
        "nets": len(design.nets),
        "pins": sum(len(net.pins) for net in design.nets),
        "utilization": area / (b.width * b.height),
    }


# ---------------------------------------------------------------------------
# text formats

def _num(tok, lineno, what="number"):
    try:
        v = float(tok)
    except ValueError:
        raise DesignError(f"expected {what}, got {tok!r}", lineno) from None
    if not np.isfinite(v):
        raise DesignError(f"non-finite {what} {tok!r}", lineno)
    return v


def _bit(tok, lineno):
    if tok not in ("0", "1"):
        raise DesignError(f"orientation must be 0 or 1, got {tok!r}", lineno)
    return int(tok)


def _statements(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_design(text):
    board = None
    comps = {}  # id -> dict, insertion ordered
    nets = []
    for lineno, toks in _statements(text):
        kw, args = toks[0], toks[1:]
        if kw == "board":
            if len(args) != 3:
                raise DesignError("board expects <W> <H> <layers>", lineno)
            if board is not None:
                raise DesignError("duplicate board statement", lineno)
            w, h = _num(args[0], lineno), _num(args[1], lineno)
            try:
                layers = int(args[2])
            except ValueError:
                raise DesignError(f"layer count must be an integer, got {args[2]!r}", lineno) from None
            if w <= 0 or h <= 0:
                raise DesignError("nonpositive board dimension", lineno)
            if layers < 1:
                raise DesignError("layer count must be positive", lineno)
            board = Board(w, h, layers)
        elif kw == "comp":
            if len(args) not in (3, 7) or (len(args) == 7 and args[3] != "fixed"):
                raise DesignError("comp expects <id> <w> <h> [fixed <x> <y> <r>]", lineno)
            cid = args[0]
            if "." in cid:
                raise DesignError(f"component id {cid!r} may not contain '.'", lineno)
            if cid in comps:
                raise DesignError(f"duplicate component id {cid!r}", lineno)
            w, h = _num(args[1], lineno), _num(args[2], lineno)
            if w <= 0 or h <= 0:
                raise DesignError(f"nonpositive dimension for component {cid!r}", lineno)
            fixed = None
            if len(args) == 7:
                fixed = (_num(args[4], lineno), _num(args[5], lineno), _bit(args[6], lineno))
            comps[cid] = {"w": w, "h": h, "fixed": fixed, "pins": {}}
        elif kw == "pin":
            if len(args) != 4:
                raise DesignError("pin expects <comp-id> <pin-id> <ox> <oy>", lineno)
            cid, pid = args[0], args[1]
            if cid not in comps:
                raise DesignError(f"pin references unknown component {cid!r}", lineno)
            c = comps[cid]
            if pid in c["pins"]:
                raise DesignError(f"duplicate pin {cid}.{pid}", lineno)
            ox, oy = _num(args[2], lineno), _num(args[3], lineno)
            if not (0 <= ox <= c["w"] and 0 <= oy <= c["h"]):
                raise DesignError(f"pin {cid}.{pid} offset lies outside the footprint", lineno)
            c["pins"][pid] = PinDef(pid, ox, oy)
        elif kw == "net":
            if len(args) < 2:
                raise DesignError("net expects <id> and at least one pin reference", lineno)
            nid = args[0]
            refs = []
            for ref in args[1:]:
                cid, dot, pid = ref.partition(".")
                if not dot or not cid or not pid:
                    raise DesignError(f"malformed pin reference {ref!r} in net {nid!r}", lineno)
                if cid not in comps or pid not in comps[cid]["pins"]:
                    raise DesignError(f"net {nid!r} references unresolved pin {ref!r}", lineno)
                refs.append((cid, pid))
            if any(n.id == nid for n in nets):
                raise DesignError(f"duplicate net id {nid!r}", lineno)
            nets.append(Net(nid, tuple(refs)))
        else:
            raise DesignError(f"unknown statement {kw!r}", lineno)
    if board is None:
        raise DesignError("missing board statement")
    components = tuple(
        Component(cid, c["w"], c["h"], c["fixed"] is not None, c["fixed"], tuple(c["pins"].values()))
        for cid, c in comps.items())
    return Design(board, components, tuple(nets))


def _fmt(v):
    return repr(float(v))


def serialize_design(design):
    b = design.board
    lines = [f"board {_fmt(b.width)} {_fmt(b.height)} {b.num_layers}"]
    for c in design.components:
        line = f"comp {c.id} {_fmt(c.width)} {_fmt(c.height)}"
        if c.fixed:
            fx, fy, fr = c.fixed_position
            line += f" fixed {_fmt(fx)} {_fmt(fy)} {int(fr)}"
        lines.append(line)
    for c in design.components:
        for p in c.pins:
            lines.append(f"pin {c.id} {p.id} {_fmt(p.ox)} {_fmt(p.oy)}")
    for net in design.nets:
        lines.append(f"net {net.id} " + " ".join(f"{c}.{p}" for c, p in net.pins))
    return "\n".join(lines) + "\n"


def parse_placement(text, design):
    seen = {}
    for lineno, toks in _statements(text):
        if toks[0] != "place" or len(toks) != 5:
            raise DesignError("expected 'place <comp-id> <x> <y> <r>'", lineno)
        cid = toks[1]
        if cid not in design._index:
            raise DesignError(f"unknown component {cid!r}", lineno)
        if cid in seen:
            raise DesignError(f"component {cid!r} placed twice", lineno)
        seen[cid] = (_num(toks[2], lineno), _num(toks[3], lineno), _bit(toks[4], lineno))
    missing = [c.id for c in design.components if c.id not in seen]
    if missing:
        raise DesignError(f"placement lacks components: {', '.join(missing)}")
    vals = [seen[c.id] for c in design.components]
    x, y, r = (np.array(v) for v in zip(*vals)) if vals else (np.zeros(0),) * 3
    return Placement(x, y, r).with_fixed(design)


def serialize_placement(placement, design):
    return "".join(
        f"place {c.id} {_fmt(placement.x[i])} {_fmt(placement.y[i])} {int(placement.r[i])}\n"
        for i, c in enumerate(design.components))
