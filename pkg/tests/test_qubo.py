import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ucpq.qubo import (
    QuboMatrix,
    IsingModel,
    export_matrix,
    format_number,
    from_terms,
    ising_energy,
    matrix_metrics,
    parse_matrix,
    qubo_energy,
    qubo_to_ising,
    raw_energy,
)

from helpers import OPTIMUM, RUNNER_UP, bits


def test_exact_cancellation_drops_entry():
    q = QuboMatrix(3).add_term(1, 2, 3).add_term(1, 2, -3)
    assert (1, 2) not in q.entries
    assert q[1, 2] == 0


def test_lower_triangle_normalized():
    q = QuboMatrix(3).add_term(2, 1, 2)
    assert q.entries == {(1, 2): 2}
    assert q[2, 1] == 2


def test_diagonal_accumulates():
    q = QuboMatrix(1).add_term(0, 0, 1).add_term(0, 0, 1)
    assert q.entries == {(0, 0): 2}


def test_out_of_range_term():
    with pytest.raises(IndexError):
        QuboMatrix(2).add_term(0, 2, 1.0)


def test_energy_length_mismatch():
    with pytest.raises(ValueError):
        qubo_energy(QuboMatrix(3), [0, 1])


def test_all_zero_state_gives_offset():
    q = from_terms(3, [(0, 1, 5), (2, 2, -1)], offset=7.5)
    assert qubo_energy(q, [0, 0, 0]) == 7.5
    assert raw_energy(q, [0, 0, 0]) == 0


def test_paper_energies(paper_qubo):
    q = paper_qubo.matrix
    assert qubo_energy(q, bits(OPTIMUM)) == 370
    assert raw_energy(q, bits(OPTIMUM)) == -20530
    assert raw_energy(q, bits(RUNNER_UP)) == -20490


def test_ising_single_variable():
    m = qubo_to_ising(QuboMatrix(1).add_linear(0, 2))
    assert m.fields[0] == -1
    assert m.offset == 1
    assert ising_energy(m, [1]) + m.offset == 2
    assert ising_energy(m, [-1]) + m.offset == 0


@pytest.mark.parametrize("c", [1.0, -3.0, 8.0])
def test_ising_single_coupling(c):
    q = QuboMatrix(2).add_term(0, 1, c)
    m = qubo_to_ising(q)
    assert m.couplings == {(0, 1): -c / 4}
    assert list(m.fields) == [-c / 4, -c / 4]
    assert m.offset == c / 4
    for x in itertools.product((0, 1), repeat=2):
        s = [2 * b - 1 for b in x]
        assert qubo_energy(q, x) == ising_energy(m, s) + m.offset


def test_ising_energy_examples():
    assert ising_energy(IsingModel(3, {}, np.zeros(3)), [1, -1, 1]) == 0
    m = IsingModel(2, {(0, 1): 1.0}, np.zeros(2))
    assert ising_energy(m, [1, 1]) == -1
    m = IsingModel(2, {(0, 1): 1.0}, np.array([1.0, 0.0]))
    assert ising_energy(m, [-1, 1]) == 2
    # enumeration oracle for the hand formula
    for s in itertools.product((-1, 1), repeat=2):
        assert ising_energy(m, s) == -(s[0] * s[1]) - s[0]


def test_ising_rejects_non_spins():
    m = IsingModel(2, {}, np.zeros(2))
    with pytest.raises(ValueError):
        ising_energy(m, [0, 1])


def test_paper_ising(paper_qubo):
    m = qubo_to_ising(paper_qubo.matrix)
    s = [2 * b - 1 for b in bits(OPTIMUM)]
    assert ising_energy(m, s) + m.offset == pytest.approx(370, rel=1e-12)


def _random_q(rng, n):
    q = QuboMatrix(n, rng.uniform(-10, 10))
    for _ in range(rng.randrange(0, n * n + 1)):
        q.add_term(rng.randrange(n), rng.randrange(n), rng.uniform(-50, 50))
    return q


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None)
def test_energy_identity_property(n, seed):
    rng = random.Random(seed)
    q = _random_q(rng, n)
    m = qubo_to_ising(q)
    x = [rng.randrange(2) for _ in range(n)]
    a = qubo_energy(q, x)
    b = ising_energy(m, [2 * v - 1 for v in x]) + m.offset
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(-5, 5)), max_size=30),
       st.randoms())
@settings(max_examples=200, deadline=None)
def test_add_term_order_independent(terms, rnd):
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    assert from_terms(5, terms) == from_terms(5, shuffled)


def test_dense_matches_sparse_energy():
    rng = random.Random(3)
    q = _random_q(rng, 7)
    U = q.to_dense()
    assert np.all(np.tril(U, -1) == 0)
    for x in itertools.product((0, 1), repeat=7):
        v = np.array(x, dtype=float)
        assert v @ U @ v + q.offset == pytest.approx(qubo_energy(q, x), rel=1e-12, abs=1e-9)


def test_metrics_paper(paper_qubo):
    m = matrix_metrics(paper_qubo.matrix)
    assert (m.n, m.cells, m.nnz, m.density, m.max_incident) == (20, 400, 55, 0.1375, 5)
    n_diag = sum(1 for i, j in paper_qubo.matrix.entries if i == j)
    assert m.couplings == m.nnz - n_diag
    assert m.line() == "n=20 nnz=55 density=13.75% max_incident=5"


def test_metrics_empty():
    m = matrix_metrics(QuboMatrix(4))
    assert (m.nnz, m.density, m.max_incident, m.couplings) == (0, 0, 0, 0)


def test_metrics_row_and_column_counts():
    # column 3 holds four entries, row 0 holds three
    q = from_terms(4, [(0, 3, 1), (1, 3, 1), (2, 3, 1), (3, 3, 1), (0, 0, 1), (0, 1, 1)])
    m = matrix_metrics(q)
    assert m.max_incident == 4
    assert m.max_degree == 4  # variable 3: three couplings plus diagonal


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(-3, 3)), max_size=40))
def test_metrics_nnz_and_density(terms):
    q = from_terms(6, terms)
    m = matrix_metrics(q)
    assert m.nnz == len(q.entries)
    assert m.density == m.nnz / 36


def test_format_number():
    assert format_number(2.0) == "2"
    assert format_number(-20530) == "-20530"
    assert format_number(0.1) == "0.1"
    assert format_number(1 / 3) == "0.333333333333"


def test_export_coo_single():
    q = QuboMatrix(1).add_linear(0, 2)
    assert export_matrix(q, "coo") == "0 0 2\n# offset 0"


def test_export_dense_empty():
    assert export_matrix(QuboMatrix(2), "dense-csv") == "0,0\n0,0"


def test_export_dense_paper(paper_qubo):
    text = export_matrix(paper_qubo.matrix, "dense-csv")
    cells = [v for row in text.split("\n") for v in row.split(",")]
    assert len(cells) == 400
    assert sum(v != "0" for v in cells) == 55
    assert "\r" not in text


def test_export_json_shape():
    q = from_terms(3, [(2, 0, 1.5), (1, 1, -4)], offset=3)
    d = json.loads(export_matrix(q, "json"))
    assert d == {"n": 3, "offset": 3, "entries": [[0, 2, 1.5], [1, 1, -4]]}


def test_export_unknown_format():
    with pytest.raises(ValueError):
        export_matrix(QuboMatrix(1), "xml")


@pytest.mark.parametrize("fmt", ["coo", "json"])
def test_paper_round_trip(paper_qubo, fmt):
    q = paper_qubo.matrix
    assert parse_matrix(export_matrix(q, fmt), fmt, n=q.n) == q


@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.sampled_from(["coo", "json"]))
@settings(max_examples=200, deadline=None)
def test_round_trip_property(n, seed, fmt):
    rng = random.Random(seed)
    # integer and dyadic coefficients survive the 12-digit text format exactly
    q = QuboMatrix(n, rng.randint(-100, 100) / 4)
    for _ in range(rng.randrange(0, n * n)):
        q.add_term(rng.randrange(n), rng.randrange(n), rng.randint(-400, 400) / 8)
    assert parse_matrix(export_matrix(q, fmt), fmt, n=n) == q


def test_json_round_trip_exact_for_any_float():
    rng = random.Random(11)
    q = _random_q(rng, 6)
    assert parse_matrix(export_matrix(q, "json"), "json") == q
