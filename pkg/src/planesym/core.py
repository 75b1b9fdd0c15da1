"""Plane groups, Laue classes and the type-I subgroup hierarchy.

Every group is stored as its list of symmetry operations ``(W, t)`` acting on
fractional direct-space coordinates, ``x -> W @ x + t``, in the standard
setting. Orbits, phase shifts and reflection conditions are derived from these
matrices elsewhere; nothing else in the package hard-codes group tables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class UnsupportedGroupError(ValueError):
    """Raised when a centered setting reaches a stage that cannot handle it."""


def _op(w, t=(0.0, 0.0)):
    return (np.array(w, dtype=int), np.array(t, dtype=float))


_I = [[1, 0], [0, 1]]
_2 = [[-1, 0], [0, -1]]
_MX = [[-1, 0], [0, 1]]  # reflection across a line perpendicular to [1 0]
_MY = [[1, 0], [0, -1]]  # reflection across a line perpendicular to [0 1]
_4P = [[0, -1], [1, 0]]
_4M = [[0, 1], [-1, 0]]
_D1 = [[0, 1], [1, 0]]
_D2 = [[0, -1], [-1, 0]]
_3P = [[0, -1], [1, -1]]
_3M = [[-1, 1], [-1, 0]]
_6P = [[1, -1], [1, 0]]
_6M = [[0, 1], [-1, 1]]
# hexagonal reflections (ITA numbering of p3m1 / p31m)
_H1 = [[0, -1], [-1, 0]]
_H2 = [[-1, 1], [0, 1]]
_H3 = [[1, 0], [1, -1]]
_H4 = [[0, 1], [1, 0]]
_H5 = [[1, -1], [0, -1]]
_H6 = [[-1, 0], [-1, 1]]

_HALF = 0.5

_OPERATIONS = {
    "p1": [_op(_I)],
    "p2": [_op(_I), _op(_2)],
    "p1m1": [_op(_I), _op(_MX)],
    "p11m": [_op(_I), _op(_MY)],
    "p1g1": [_op(_I), _op(_MX, (0, _HALF))],
    "p11g": [_op(_I), _op(_MY, (_HALF, 0))],
    "c1m1": [_op(_I), _op(_MX)],
    "c11m": [_op(_I), _op(_MY)],
    "p2mm": [_op(_I), _op(_2), _op(_MX), _op(_MY)],
    "p2mg": [_op(_I), _op(_2), _op(_MX, (_HALF, 0)), _op(_MY, (_HALF, 0))],
    "p2gm": [_op(_I), _op(_2), _op(_MX, (0, _HALF)), _op(_MY, (0, _HALF))],
    "p2gg": [_op(_I), _op(_2), _op(_MX, (_HALF, _HALF)), _op(_MY, (_HALF, _HALF))],
    "c2mm": [_op(_I), _op(_2), _op(_MX), _op(_MY)],
    "p4": [_op(_I), _op(_2), _op(_4P), _op(_4M)],
    "p4mm": [_op(_I), _op(_2), _op(_4P), _op(_4M),
             _op(_MX), _op(_MY), _op(_D1), _op(_D2)],
    "p4gm": [_op(_I), _op(_2), _op(_4P), _op(_4M),
             _op(_MX, (_HALF, _HALF)), _op(_MY, (_HALF, _HALF)),
             _op(_D1, (_HALF, _HALF)), _op(_D2, (_HALF, _HALF))],
    "p3": [_op(_I), _op(_3P), _op(_3M)],
    "p3m1": [_op(_I), _op(_3P), _op(_3M), _op(_H1), _op(_H2), _op(_H3)],
    "p31m": [_op(_I), _op(_3P), _op(_3M), _op(_H4), _op(_H5), _op(_H6)],
    "p6": [_op(_I), _op(_3P), _op(_3M), _op(_2), _op(_6P), _op(_6M)],
    "p6mm": [_op(_I), _op(_3P), _op(_3M), _op(_2), _op(_6P), _op(_6M),
             _op(_H1), _op(_H2), _op(_H3), _op(_H4), _op(_H5), _op(_H6)],
}

_FAMILY = {
    "p1": "oblique", "p2": "oblique",
    "p1m1": "rectangular", "p11m": "rectangular", "p1g1": "rectangular",
    "p11g": "rectangular", "c1m1": "rectangular", "c11m": "rectangular",
    "p2mm": "rectangular", "p2mg": "rectangular", "p2gm": "rectangular",
    "p2gg": "rectangular", "c2mm": "rectangular",
    "p4": "square", "p4mm": "square", "p4gm": "square",
    "p3": "hexagonal", "p3m1": "hexagonal", "p31m": "hexagonal",
    "p6": "hexagonal", "p6mm": "hexagonal",
}

GROUP_NAMES = tuple(_OPERATIONS)
CENTERED = frozenset({"c1m1", "c11m", "c2mm"})
PRIMITIVE = tuple(g for g in GROUP_NAMES if g not in CENTERED)
#: the 17 settings above p1 that take part in model selection
SELECTABLE = tuple(g for g in PRIMITIVE if g != "p1")

_EDGES = {
    "p2": ("p2mm", "p2mg", "p2gm", "p2gg", "p4", "p6"),
    "p1m1": ("p2mm", "p2mg"),
    "p11m": ("p2mm", "p2gm"),
    "p1g1": ("p2gm", "p2gg"),
    "p11g": ("p2mg", "p2gg"),
    "p2mm": ("p4mm",),
    "p2gg": ("p4gm",),
    "p4": ("p4mm", "p4gm"),
    "p3": ("p3m1", "p31m", "p6"),
    "p3m1": ("p6mm",),
    "p31m": ("p6mm",),
    "p6": ("p6mm",),
}


@dataclass(frozen=True)
class PlaneGroup:
    """One setting of a plane symmetry group."""

    name: str
    family: str
    operations: tuple = field(repr=False, compare=False)

    @property
    def k(self) -> int:
        """Multiplicity of the general position (number of point operations)."""
        return len(self.operations)

    @property
    def centered(self) -> bool:
        return self.name in CENTERED

    @cached_property
    def matrices(self) -> np.ndarray:
        return np.stack([w for w, _ in self.operations])

    @cached_property
    def translations(self) -> np.ndarray:
        return np.stack([t for _, t in self.operations])

    @property
    def has_glides(self) -> bool:
        return bool(np.any(self.translations % 1.0 != 0))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LaueClass:
    name: str
    order: int


LAUE_CLASSES = {
    "2": LaueClass("2", 2),
    "2mm": LaueClass("2mm", 4),
    "4": LaueClass("4", 4),
    "4mm": LaueClass("4mm", 8),
    "6": LaueClass("6", 6),
    "6mm": LaueClass("6mm", 12),
}

GROUPS = {
    name: PlaneGroup(name, _FAMILY[name], tuple(ops))
    for name, ops in _OPERATIONS.items()
}


def get_group(group) -> PlaneGroup:
    """Look up a group by Hermann-Mauguin setting string (or pass one through)."""
    if isinstance(group, PlaneGroup):
        return group
    try:
        return GROUPS[group]
    except KeyError:
        raise ValueError(f"unknown plane group setting {group!r}") from None


def multiplicity(group) -> int:
    return get_group(group).k


class HierarchyGraph:
    """Directed graph of maximal-subgroup -> minimal-supergroup edges."""

    def __init__(self, edges=None):
        edges = _EDGES if edges is None else edges
        self._up = {g: tuple(edges.get(g, ())) for g in PRIMITIVE}
        down = {g: [] for g in PRIMITIVE}
        for sub, sups in self._up.items():
            for sup in sups:
                down[sup].append(sub)
        self._down = {g: tuple(v) for g, v in down.items()}

    @property
    def nodes(self):
        return tuple(GROUPS[g] for g in PRIMITIVE)

    @property
    def edges(self):
        return tuple((sub, sup) for sub, sups in self._up.items() for sup in sups)

    def _check(self, group):
        g = get_group(group)
        if g.centered:
            raise UnsupportedGroupError(
                f"{g.name} is centered; its hierarchy relations need re-indexing"
            )
        return g.name

    def minimal_supergroups(self, group):
        return [GROUPS[g] for g in self._up[self._check(group)]]

    def maximal_subgroups(self, group):
        return [GROUPS[g] for g in self._down[self._check(group)]]

    def topological_order(self):
        """Primitive settings ordered so every subgroup precedes its supergroups."""
        return sorted(PRIMITIVE, key=lambda g: (GROUPS[g].k, PRIMITIVE.index(g)))


HIERARCHY = HierarchyGraph()


def minimal_supergroups(group):
    return HIERARCHY.minimal_supergroups(group)


def maximal_subgroups(group):
    return HIERARCHY.maximal_subgroups(group)
