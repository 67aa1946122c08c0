import numpy as np
import pytest

from nsplace import kernels
from nsplace.design import Board, Component, Design, Net, PinDef, Placement


def make_design(board, comps, nets=()):
    """Small hand-built design.

    ``comps`` holds ``(id, w, h, pins)`` or ``(id, w, h, pins, (x, y, r))``
    for a fixed part, with ``pins`` a dict ``pin id -> (ox, oy)``.
    ``nets`` holds ``(id, ["C.p", ...])``.
    """
    components = []
    for entry in comps:
        cid, w, h, pins = entry[:4]
        fixed = entry[4] if len(entry) > 4 else None
        components.append(Component(cid, w, h, fixed is not None, fixed,
                                    tuple(PinDef(p, *o) for p, o in pins.items())))
    net_objs = tuple(Net(nid, tuple(tuple(ref.split(".")) for ref in refs)) for nid, refs in nets)
    return Design(Board(*board), tuple(components), net_objs)


def placement(design, xs, ys, rs=None):
    return Placement(np.asarray(xs, float), np.asarray(ys, float),
                     np.zeros(len(xs), np.int8) if rs is None else np.asarray(rs, np.int8))


@pytest.fixture(params=kernels.available())
def backend(request):
    return request.param



ACCEPTANCE = []
"""``(criterion, passed, detail)`` rows appended by the acceptance suite."""


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
