"""Built-in example inputs.

The accepted entries are the complex torus and the four hyperelliptic-type
quotients (deck groups of orders 2, 3, 4, 6); the rejected entries exercise
each failure mode: a non-torsion extension class in two flavors and an
action with no invariant complex structure.
"""

from __future__ import annotations

from .formats import InputDocument

I2 = [[1, 0], [0, 1]]


def _doc(actions, tails=None) -> InputDocument:
    return InputDocument(m=1, n=1, actions=actions, tails=tails or {})


CATALOG: dict = {
    # free abelian: the complex torus itself
    "TORUS": _doc([I2, I2]),
    # deck group Z/2: the classical bielliptic action x -> -x
    "HYPER2": _doc([[[-1, 0], [0, -1]], I2], {(0, 1): [1, 0]}),
    # deck group Z/3: order-3 action, det(A - I) = 3 makes the class torsion
    "HYPER3": _doc([[[0, -1], [1, -1]], I2], {(0, 1): [1, 0]}),
    # deck group Z/4: quarter turn, det(A - I) = 2
    "HYPER4": _doc([[[0, -1], [1, 0]], I2], {(0, 1): [1, 0]}),
    # deck group Z/6: order-6 action, det(A - I) = 1 (the class even splits)
    "HYPER6": _doc([[[1, -1], [1, 0]], I2], {(0, 1): [1, 0]}),
    # trivial action with a nonzero tail: the class has infinite order
    "KODAIRA": _doc([I2, I2], {(0, 1): [1, 0]}),
    # same mechanism, tail in the other fiber direction
    "HEIS": _doc([I2, I2], {(0, 1): [0, 1]}),
    # diag(-1, 1): odd isotypic components, no invariant complex structure
    "DIAG-FAIL": _doc([[[-1, 0], [0, 1]], I2]),
}

ACCEPTED = ("TORUS", "HYPER2", "HYPER3", "HYPER4", "HYPER6")
REJECTED = ("KODAIRA", "HEIS", "DIAG-FAIL")


def names() -> list[str]:
    return list(CATALOG)


def get(name: str) -> InputDocument:
    key = name.upper()
    if key not in CATALOG:
        raise KeyError(f"unknown example {name!r}; known: {', '.join(CATALOG)}")
    return CATALOG[key]
