"""Spectrum, ε-net lattice and the cut family."""

import math
import random

import numpy as np
import pytest

from biscount.bigraph import (
    Part,
    VertexSet,
    complete_bipartite,
    cut_value,
    cycle,
    disjoint_union,
    generate_regular,
)
from biscount.errors import BudgetExceededError, SizeLimitError
from biscount.oracle import sample_uncovered_cuts, uncovered_cuts
from biscount.spectral import (
    build_cut_family,
    decompose,
    dump_cut_family,
    epsilon_net,
    laplacian,
    lattice_point_count,
    net_size_bound,
    projection_residual,
    round_to_cut,
)


def _instances():
    return [
        complete_bipartite(1),
        complete_bipartite(2),
        complete_bipartite(3),
        cycle(3),
        disjoint_union(complete_bipartite(4), complete_bipartite(4)),
        generate_regular(10, 5, seed=2),
        generate_regular(16, 8, seed=5),
    ]


# ============================================================================
# DECOMPOSITION
# ============================================================================


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_complete_bipartite_has_rank_one(d):
    assert decompose(complete_bipartite(d)).k == 1


def test_two_copies_have_rank_two(two_k44, two_k22):
    assert decompose(two_k44).k == 2
    assert decompose(two_k22).k == 2


def test_six_cycle_rank(c6):
    basis = decompose(c6)
    assert basis.k == 3
    # adjacency eigenvalues ±2, ±1, ±1
    assert np.allclose(basis.eigenvalues, [0, 1, 1, 3, 3, 4])


@pytest.mark.parametrize("g", _instances(), ids=lambda g: f"n{g.n}d{g.d}")
def test_basis_invariants(g):
    basis = decompose(g)
    mu = basis.eigenvalues
    assert np.all(np.diff(mu) >= -1e-12)
    assert abs(mu[0]) < 1e-9
    assert abs(mu[-1] - 2 * g.d) < 1e-9
    e = basis.eigenvectors
    assert np.allclose(e.T @ e, np.eye(2 * g.n), atol=1e-9)
    assert basis.k <= 4 * g.n / g.d
    if basis.k < 2 * g.n:
        assert mu[basis.k] > g.d / 2 - 1e-9
    lap = laplacian(g)
    assert np.max(np.linalg.norm(lap @ e - e * mu, axis=0)) <= 1e-9 * np.linalg.norm(lap)


def test_decompose_rejects_bad_tolerance(k22):
    with pytest.raises(ValueError):
        decompose(k22, tol=0)


@pytest.mark.parametrize("g", _instances(), ids=lambda g: f"n{g.n}d{g.d}")
def test_small_cuts_lie_close_to_the_low_subspace(g):
    basis = decompose(g)
    rng = random.Random(g.n * 31 + g.d)
    for _ in range(300):
        mask = rng.getrandbits(2 * g.n)
        s = g.v_set(mask)
        t = max(1, math.ceil(cut_value(g, s) / g.d))
        assert projection_residual(basis, s) <= 2 * t + 1e-9


# ============================================================================
# ε-NET
# ============================================================================


def test_net_with_spacing_above_the_radius_is_the_origin(k11):
    basis = decompose(k11)
    points = list(epsilon_net(basis, norm_bound=1.0))
    assert len(points) == 1
    assert np.allclose(points[0], 0)


def test_net_one_dimensional_lattice():
    basis = decompose(complete_bipartite(4))
    assert basis.k == 1
    points = list(epsilon_net(basis))
    assert len(points) == 3
    norms = sorted(round(float(np.linalg.norm(p)), 9) for p in points)
    assert norms == [0.0, round(math.sqrt(2), 9), round(math.sqrt(2), 9)]


@pytest.mark.parametrize("g", _instances(), ids=lambda g: f"n{g.n}d{g.d}")
def test_net_contains_origin_and_respects_bounds(g):
    basis = decompose(g)
    points = list(epsilon_net(basis))
    assert any(np.allclose(p, 0) for p in points)
    assert all(np.linalg.norm(p) <= math.sqrt(g.n) + 1e-9 for p in points)
    # one extra lattice step per axis over the asymptotic (2√(nk)/ε)^k
    assert len(points) <= (2 * math.sqrt(g.n * basis.k) / math.sqrt(2) + 1) ** basis.k
    asymptotic = (2 * math.sqrt(g.n * basis.k) / math.sqrt(2)) ** basis.k
    assert net_size_bound(g.n, basis.k) == pytest.approx(asymptotic)


def test_net_covers_random_vectors_of_the_subspace(c6):
    basis = decompose(c6)
    points = np.array(list(epsilon_net(basis)))
    rng = np.random.default_rng(1)
    u = basis.low_basis
    for _ in range(200):
        coeff = rng.normal(size=basis.k)
        coeff *= rng.uniform(0, math.sqrt(c6.n)) / np.linalg.norm(coeff)
        v = u @ coeff
        assert np.min(np.linalg.norm(points - v, axis=1)) <= math.sqrt(2) + 1e-9


def test_lattice_point_count_small_cases():
    assert lattice_point_count(1, 0) == 1
    assert lattice_point_count(1, 2) == 3
    assert lattice_point_count(2, 1) == 5
    assert lattice_point_count(2, 2) == 9
    assert lattice_point_count(3, 1) == 7


def test_net_budget_is_enforced():
    basis = decompose(generate_regular(16, 8, seed=5))
    with pytest.raises(BudgetExceededError) as err:
        list(epsilon_net(basis, budget=2))
    assert err.value.stage == "epsilon_net"
    assert err.value.limit == 2


# ============================================================================
# ROUNDING AND THE CUT FAMILY
# ============================================================================


def test_round_to_cut_examples():
    assert round_to_cut(np.zeros(4)).indices() == []
    assert round_to_cut(np.ones(4)).indices() == [0, 1, 2, 3]
    assert round_to_cut([0.5, 0.49, 0.51, 0.2]).indices() == [0, 2]
    assert round_to_cut(np.array([0.0] * 9 + [0.7])).indices() == [9]


def test_k22_family_is_empty_and_full(k22):
    family = build_cut_family(k22, decompose(k22))
    assert [c.indices() for c in family] == [[], [0, 1, 2, 3]]


def test_family_is_deduplicated_and_canonical(two_k44):
    family = build_cut_family(two_k44, decompose(two_k44))
    keys = [c.key() for c in family]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    assert family.net_points >= len(family)
    assert VertexSet.empty(Part.V, 16) in family


def test_family_does_not_depend_on_worker_count():
    g = generate_regular(16, 8, seed=5)
    basis = decompose(g)
    one = build_cut_family(g, basis, workers=1)
    four = build_cut_family(g, basis, workers=4)
    assert one.cuts == four.cuts
    assert one.net_points == four.net_points


@pytest.mark.parametrize(
    "g",
    [
        complete_bipartite(2),
        cycle(3),
        complete_bipartite(3),
        disjoint_union(complete_bipartite(4), complete_bipartite(4)),
    ],
    ids=["K22", "C6", "K33", "2xK44"],
)
def test_family_covers_every_small_cut(g):
    basis = decompose(g)
    assert basis.k <= 4 * g.n / g.d
    family = build_cut_family(g, basis)
    assert uncovered_cuts(g, list(family)) == []


def test_component_aligned_cuts_are_covered(two_k44):
    family = list(build_cut_family(two_k44, decompose(two_k44)))
    aligned = [
        two_k44.v_set(0),
        two_k44.cut_of(0x0F, 0x0F),
        two_k44.cut_of(0xF0, 0xF0),
        two_k44.v_set((1 << 16) - 1),
    ]
    for s in aligned:
        assert cut_value(two_k44, s) == 0
        assert any(s.sym_diff_size(c) <= 32 for c in family)


def test_dump_cut_family(tmp_path, k22):
    family = build_cut_family(k22, decompose(k22))
    path = tmp_path / "cuts.txt"
    dump_cut_family(family, path)
    assert path.read_text(encoding="utf-8") == "\n0 1 2 3\n"


@pytest.mark.parametrize(
    "g",
    [complete_bipartite(9), disjoint_union(complete_bipartite(5), complete_bipartite(5))],
    ids=["K99", "2xK55"],
)
def test_family_covers_sampled_cuts(g):
    family = list(build_cut_family(g, decompose(g)))
    assert sample_uncovered_cuts(g, family, samples=10_000, seed=1) == []


@pytest.mark.slow
@pytest.mark.parametrize("n, d, seed", [(16, 8, 5), (20, 10, 3)])
def test_family_covers_sampled_cuts_on_random_graphs(n, d, seed):
    g = generate_regular(n, d, seed)
    family = list(build_cut_family(g, decompose(g)))
    assert sample_uncovered_cuts(g, family, samples=10_000, seed=seed) == []


def test_sampled_covering_without_cuts(k22):
    assert len(sample_uncovered_cuts(k22, [], samples=50)) == 50
    with pytest.raises(SizeLimitError):
        sample_uncovered_cuts(complete_bipartite(33), [], samples=1)
