"""Elementary cellular automata as graph dynamics on oriented cycles.

Cells are the vertices of a degree-2 graph whose edges join port 1 of a cell
to port 0 of its right neighbour.  On lines, a missing neighbour reads as the
quiescent state ``alphabet[0]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .graph import CayleyGraph
from .rules import LocalRule, _star_image, enumerate_disks


@dataclass(frozen=True)
class CARule:
    alphabet: tuple
    transition: dict  # (left, self, right) -> state

    def __post_init__(self):
        for triple in itertools.product(self.alphabet, repeat=3):
            if triple not in self.transition:
                raise ValueError(f"transition undefined on {triple}")

    def __call__(self, left, mid, right):
        return self.transition[(left, mid, right)]

    @classmethod
    def wolfram(cls, code: int) -> "CARule":
        """Two-state rule by Wolfram number; states are ``"0"`` and ``"1"``."""
        if not 0 <= code < 256:
            raise ValueError("Wolfram codes run from 0 to 255")
        table = {}
        for left, mid, right in itertools.product((0, 1), repeat=3):
            bit = (code >> (4 * left + 2 * mid + right)) & 1
            table[(str(left), str(mid), str(right))] = str(bit)
        return cls(("0", "1"), table)

    @classmethod
    def from_function(cls, alphabet: Sequence, fn) -> "CARule":
        alphabet = tuple(alphabet)
        return cls(alphabet, {t: fn(*t) for t in itertools.product(alphabet, repeat=3)})


def ca_reference_step(ca: CARule, tape: Sequence) -> list:
    """One synchronous step on a cyclic tape."""
    n = len(tape)
    return [ca(tape[i - 1], tape[i], tape[(i + 1) % n]) for i in range(n)]


def ca_to_cgd(ca: CARule) -> LocalRule:
    """Radius-1 rule relabelling every cell by the CA transition."""
    quiet = ca.alphabet[0]

    def neighbour_label(disk, p):
        e = disk.nbrs[0][p]
        return quiet if e is None else disk.vlabels[e[0]]

    table = {}
    for disk in enumerate_disks(2, ca.alphabet, (), 1, graph_class="oriented"):
        new = ca(neighbour_label(disk, 0), disk.vlabels[0], neighbour_label(disk, 1))
        table[disk] = _star_image(disk, label=new, keep_label=False)
    return LocalRule(2, ca.alphabet, (), 1, 3, table=table, graph_class="oriented",
                     name="cellular_automaton")


def cells(x: CayleyGraph) -> list:
    """Labels read rightwards from the pointer until the walk stops or wraps."""
    out = [x.vlabels[0]]
    v = 0
    while True:
        e = x.nbrs[v][1]
        if e is None or e[0] == 0:
            return out
        v = e[0]
        out.append(x.vlabels[v])
