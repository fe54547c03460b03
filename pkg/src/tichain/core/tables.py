"""
Builtin inequality tables.

``TABLE1`` holds eleven inequivalent facets of the nearest/next-to-nearest
neighbour TI polytope with their local bounds. ``TABLE2`` holds, for the same
rows, the reference quantum values with the measurement angles that reach them,
and whether a tripartite-local box consistent with TI can beat the local bound.
"""

from dataclasses import dataclass
from pathlib import Path

from tichain.core.errors import InputFormatError
from tichain.core.polytope import BellInequality, read_inequalities

TABLES_VERSION = 1

# L  C0 C1 CAB00 CAB01 CAB10 CAB11 CAC00 CAC01 CAC10 CAC11
_TABLE1_ROWS = (
    (-3, (-2, -2, 2, 2, -1, 1, 0, 1, 0, 0)),
    (-4, (-2, -4, -2, 2, 2, 2, 1, 0, 0, 1)),
    (-5, (-3, -3, 2, 2, 2, -3, 1, 0, -1, 2)),
    (-6, (-4, -6, -3, 2, 3, 2, 2, 0, 1, 1)),
    (-11, (-4, -12, -4, 6, 6, 6, 1, -1, -1, 4)),
    (-7, (-5, -5, 2, 3, 2, -4, 1, 1, -1, 3)),
    (-8, (-6, -8, -4, 3, 3, 2, 3, 1, 1, 1)),
    (-5, (-2, 2, 2, -2, -2, -4, 1, 1, 1, 2)),
    (-3, (-3, 1, 1, 1, 1, -1, 1, 0, -1, 1)),
    (-6, (-4, 2, 2, 2, 2, -4, 1, -1, -1, 3)),
    (-6, (-6, 0, 2, 3, 3, -2, 3, -1, -1, 1)),
)

TABLE1: dict[int, BellInequality] = {
    row_id: BellInequality(coefs, bound, name=f"table1-{row_id}")
    for row_id, (bound, coefs) in enumerate(_TABLE1_ROWS, start=1)
}

I_T = TABLE1[2]
I_G = TABLE1[4]


@dataclass(frozen=True)
class QuantumRow:
    quantum_value: float
    theta: float
    phi: float
    genuine: bool


TABLE2: dict[int, QuantumRow] = {
    1: QuantumRow(-3.111, 6.236, 1.501, False),
    2: QuantumRow(-4.184, 0.077, 1.874, False),
    3: QuantumRow(-5.098, 2.17, 6.275, False),
    4: QuantumRow(-6.179, 6.236, 4.175, True),
    5: QuantumRow(-11.104, 5.996, 4.691, False),
    6: QuantumRow(-7.073, 4.093, 0.29, True),
    7: QuantumRow(-8.191, 4.359, 6.197, True),
    8: QuantumRow(-5.039, 3.169, 5.226, False),
    9: QuantumRow(-3.04, 3.843, 1.193, True),
    10: QuantumRow(-6.109, 0.817, 2.421, True),
    11: QuantumRow(-6.081, 3.787, 6.067, True),
}

# sharper values quoted alongside the table
I_T_QUANTUM = -4.1847
I_G_QUANTUM = -6.1798
I_G_SEESAW = -6.1907
I_G_TRIPARTITE_LOCAL = -6.1525


def inequality(row_id: int) -> BellInequality:
    try:
        return TABLE1[row_id]
    except KeyError:
        raise InputFormatError(
            f"unknown inequality id {row_id}; builtin ids are 1..{len(TABLE1)}"
        )


def quantum_row(row_id: int) -> QuantumRow:
    try:
        return TABLE2[row_id]
    except KeyError:
        raise InputFormatError(
            f"unknown inequality id {row_id}; builtin ids are 1..{len(TABLE2)}"
        )


def select_inequalities(
    row_id: int | None = None,
    file: Path | None = None,
    table1: bool = False,
) -> list[tuple[int | None, BellInequality]]:
    """
    Resolve exactly one selector into (builtin id or None, inequality) pairs.
    """
    chosen = sum(x is not None and x is not False for x in (row_id, file, table1))
    if chosen != 1:
        raise InputFormatError("give exactly one of --id, --file and --table1")
    if table1:
        return list(TABLE1.items())
    if row_id is not None:
        return [(row_id, inequality(row_id))]
    ineqs = read_inequalities(file)
    if not ineqs:
        raise InputFormatError(f"{file} holds no inequalities")
    return [(None, ineq) for ineq in ineqs]
