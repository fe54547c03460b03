from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from tests.consts import ALL_ONES_I_G, ALL_ONES_I_T, GENUINE_ROWS, TABLE1_BOUNDS
from tests.cycle_oracle import simple_cycles
from tichain.core.config import env
from tichain.core.errors import InputFormatError, InvalidStateError
from tichain.core.facets import affine_rank
from tichain.core.marginals import check_ti_consistency
from tichain.core.polytope import (
    Behavior,
    BellInequality,
    TripartiteBox,
    _tile_vector,
    ambient_dim,
    canonical_form,
    enumerate_facets,
    evaluate,
    format_inequalities,
    genuine_ti_violation_gap,
    is_tripartite_local,
    lift_to_distribution,
    local_bound,
    read_inequalities,
    symmetry_classes,
    symmetry_group,
    transform,
    tripartite_local_bound,
    verify_facet,
    vertex_behaviors,
    vertex_table,
)
from tichain.core.tables import I_G, I_T, TABLE1

PR_CORRELATORS = ((1, 1), (1, -1))


def test_deterministic_behavior_of_constant_strategy():
    """Every site answering +1 gives all correlators equal to one."""
    ones = Behavior.deterministic(0, 0, 0)
    assert ones.values == (1,) * 10
    assert evaluate(I_T, ones) == ALL_ONES_I_T
    assert evaluate(I_G, ones) == ALL_ONES_I_G


def test_behavior_and_inequality_validation():
    """Wrong lengths, out-of-range correlators and zero inequalities are rejected."""
    with pytest.raises(InvalidStateError):
        Behavior((1,) * 9)
    with pytest.raises(InvalidStateError):
        Behavior((2,) + (0,) * 9)
    with pytest.raises(InvalidStateError):
        BellInequality((0,) * 10)


def test_inequality_sum_adds_bounds():
    """Summed inequalities add their local bounds."""
    total = I_T + I_G
    assert total.local_bound == I_T.local_bound + I_G.local_bound
    assert total.coefficients[1] == -10


def test_window_two_vertices():
    """Nearest-neighbour vertices come from the 24 simple cycles over four strategies."""
    table = vertex_table(2)
    assert table.shape[1] == 6
    assert len(table) <= 24
    assert ambient_dim(2) == 6


def test_vertices_are_exact_and_valid():
    """Vertex numerators divide back into correlators in [-1, 1]."""
    table = vertex_table(3)
    assert table.dtype == np.int64
    assert np.abs(table).max() <= env.behavior_denominator
    behaviors = vertex_behaviors()
    assert all(isinstance(v, Fraction) for v in behaviors[0].values)


def test_full_polytope_is_ten_dimensional():
    """The TI polytope with next-to-nearest neighbours is full-dimensional."""
    assert ambient_dim(3) == 10


def test_table1_local_bounds():
    """Exact local bounds reproduce every tabulated bound."""
    for row_id, expected in enumerate(TABLE1_BOUNDS, start=1):
        value = local_bound(TABLE1[row_id])
        assert isinstance(value, Fraction)
        assert value == expected


def test_table1_rows_are_facets():
    """Every builtin inequality is valid, tight and of facet dimension."""
    for ineq in TABLE1.values():
        check = verify_facet(ineq)
        assert check.valid and check.tight
        assert check.face_dim == check.ambient_dim - 1
        assert check.is_facet


def test_loosened_bound_is_not_tight():
    """Lowering the bound keeps validity but loses tightness."""
    loose = BellInequality(I_T.coefficients, I_T.local_bound - 1)
    check = verify_facet(loose)
    assert check.valid
    assert not check.tight
    assert not check.is_facet


def test_raised_bound_is_invalid():
    """Raising the bound above the minimum breaks validity."""
    check = verify_facet(BellInequality(I_T.coefficients, I_T.local_bound + 1))
    assert not check.valid


def test_float_inequality_bound():
    """Non-rational coefficients fall back to floating point."""
    scaled = BellInequality(tuple(0.5 * float(c) for c in I_T.coefficients))
    assert abs(local_bound(scaled) - 0.5 * float(I_T.local_bound)) < 1e-12


def test_nearest_neighbour_facets_match_qhull():
    """Facets of the nearest-neighbour polytope agree with Qhull and are all tight."""
    table = vertex_table(2)
    facets = enumerate_facets(vertices=table)
    hull = ConvexHull(table.astype(float))
    normals = {tuple(np.round(-eq[:-1] / np.max(np.abs(eq[:-1])), 6)) for eq in hull.equations}
    found = set()
    for ineq in facets:
        a = np.array([float(c) for c in ineq.coefficients[:6]])
        found.add(tuple(np.round(a / np.max(np.abs(a)), 6)))
        values = table @ np.array([int(c) for c in ineq.coefficients[:6]])
        bound = int(ineq.local_bound * env.behavior_denominator)
        assert int(values.min()) == bound
        assert affine_rank(table[values == bound].tolist()) == 5
    assert found == normals


def test_projected_facets_live_in_full_space():
    """Projected facets carry zeros on the dropped coordinates."""
    facets = enumerate_facets(vertices=vertex_table(2), dims=[0, 1])
    assert all(len(f.coefficients) == 10 for f in facets)
    assert all(not any(f.coefficients[2:]) for f in facets)
    # the single-site square |E0|, |E1| <= 1
    assert len(facets) == 4


def test_symmetry_group_preserves_vertices():
    """Relabellings and reflection map the vertex set onto itself."""
    vertices = {tuple(row) for row in vertex_table(3).tolist()}
    group = symmetry_group()
    assert len(group) == 16
    for perm, signs in group:
        image = {tuple(s * row[p] for p, s in zip(perm, signs)) for row in vertices}
        assert image == vertices


def test_canonical_form_is_orbit_invariant():
    """Every transform of an inequality shares its canonical form and bound."""
    for g in symmetry_group():
        moved = transform(I_G, g)
        assert canonical_form(moved) == canonical_form(I_G)
        assert local_bound(moved) == local_bound(I_G)


def test_symmetry_classes_group_orbits():
    """Inequalities are grouped by orbit in order of first appearance."""
    group = symmetry_group()
    ineqs = [transform(I_T, group[3]), I_G, transform(I_T, group[7]), I_T]
    classes = symmetry_classes(ineqs)
    assert len(classes) == 2
    assert len(classes[0]) == 3
    assert classes[1] == [I_G]


def test_tripartite_bounds():
    """The TI-extendable tripartite minimum equals the local bound for I_T and beats it for I_G."""
    assert tripartite_local_bound(I_T) == pytest.approx(-4, abs=1e-7)
    assert tripartite_local_bound(I_G) <= -6.1525 + 1e-6
    assert tripartite_local_bound(I_G, ti_constraint=False) <= tripartite_local_bound(I_G) + 1e-9


def test_plain_tripartite_bound_is_exact():
    """Without the TI extension the minimum is an exact vertex of the 64 deterministic triples."""
    value = tripartite_local_bound(I_T, ti_constraint=False)
    assert isinstance(value, Fraction)
    assert value <= -4


def test_longer_windows_tighten_the_bound():
    """Each extra site of the extension can only raise the tripartite minimum."""
    ineq = TABLE1[5]
    bounds = [tripartite_local_bound(ineq, window=w) for w in (3, 4, env.GENUINE_WINDOW)]
    assert all(b >= a - 1e-7 for a, b in zip(bounds, bounds[1:]))
    # P12 = P23 alone lets a local P123 go below the bound of -11
    assert bounds[0] < -12
    assert bounds[-1] >= -11 - 1e-7


def test_extension_window_must_cover_three_sites():
    """A window shorter than the tripartite box is rejected."""
    with pytest.raises(InvalidStateError):
        tripartite_local_bound(I_T, window=2)


def test_genuine_rows():
    """Rows flagged genuine have a positive gap; the rest have none."""
    for row_id, ineq in TABLE1.items():
        gap = genuine_ti_violation_gap(ineq)
        assert gap >= -1e-7
        assert (gap > env.GENUINE_GAP_TOL) == (row_id in GENUINE_ROWS), row_id


def test_deterministic_box_correlators():
    """Correlators of a deterministic box match the deterministic behavior."""
    for strategies in ((0, 1, 2), (3, 3, 1), (2, 0, 3)):
        box = TripartiteBox.deterministic(*strategies)
        from_box = Behavior.from_box(box)
        direct = Behavior.deterministic(*strategies)
        assert np.allclose(np.array(from_box.values, dtype=float), np.array(direct.values, dtype=float))


def test_tripartite_locality():
    """White noise is tripartite local; a PR box on two sites is not."""
    assert is_tripartite_local(TripartiteBox.white_noise())
    assert is_tripartite_local(TripartiteBox.deterministic(1, 2, 3))
    assert not is_tripartite_local(TripartiteBox.from_pair(PR_CORRELATORS))


def test_box_validation():
    """Signaling or unnormalized boxes are rejected."""
    with pytest.raises(InvalidStateError):
        TripartiteBox(np.zeros((2,) * 6))
    signaling = np.zeros((2,) * 6)
    for x1 in (0, 1):
        for x2 in (0, 1):
            for x3 in (0, 1):
                # party 2 answers with the input of party 1
                signaling[0, x1, 0, x1, x2, x3] = 1
    with pytest.raises(InvalidStateError):
        TripartiteBox(signaling)


def test_inequality_file_format(tmp_path):
    """Written inequalities read back with names taken from their line."""
    path = tmp_path / "ineqs.txt"
    path.write_text(format_inequalities([I_T, I_G]))
    ineqs = read_inequalities(path)
    assert [i.coefficients for i in ineqs] == [I_T.coefficients, I_G.coefficients]
    assert [i.local_bound for i in ineqs] == [-4, -6]
    assert ineqs[0].name == "line2"


def test_inequality_file_errors():
    """Short lines and non-numbers report the offending line."""
    with pytest.raises(InputFormatError, match="line 1"):
        read_inequalities("1 2 3\n")
    with pytest.raises(InputFormatError, match="line 2"):
        read_inequalities("# comment\n" + " ".join(["a"] * 11) + "\n")


def test_lifted_loop_is_consistent():
    """The strategy distribution of a loop is TI consistent."""
    P = lift_to_distribution([4, 17])
    assert P.d == 4 and P.n == 3
    assert check_ti_consistency(P)


def test_vertex_count_matches_depth_first_search():
    """Distinct window-3 vertices equal the distinct loop averages of a plain DFS over 16 strategy pairs."""
    denominator = env.behavior_denominator
    seen = set()
    for tiles in simple_cycles(4, 3):
        total = np.sum([_tile_vector(*t) for t in tiles], axis=0) * (denominator // len(tiles))
        seen.add(tuple(int(v) for v in total))
    assert len(vertex_table(3)) == len(seen)
    assert {tuple(row) for row in vertex_table(3).tolist()} == seen
