import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ucpq import _kernels
from ucpq.instance import UcpInstance
from ucpq.qubo import QuboMatrix, from_terms, qubo_energy, raw_energy
from ucpq.solve import (
    ACCEPTANCE_ANNEAL,
    AnnealParams,
    SizeGuardError,
    bitstring,
    brute_force,
    exchange_pairs,
    simulated_annealing,
    solve_and_report,
    worker_count,
)
from ucpq.tailored import PAPER_PENALTIES, compile_tailored

from helpers import OPTIMUM, all_bits, dense_energies


def rand_q(seed, n, integer=False):
    rng = random.Random(seed)
    q = QuboMatrix(n, rng.uniform(-5, 5))
    for _ in range(rng.randrange(n * n + 1)):
        c = rng.randint(-9, 9) if integer else rng.uniform(-10, 10)
        q.add_term(rng.randrange(n), rng.randrange(n), c)
    return q


# -- exhaustive -----------------------------------------------------------------

def test_paper(paper_qubo):
    r = brute_force(paper_qubo)
    assert r.best_energy == 370 and r.best_raw == -20530
    assert bitstring(r.minimizers[0]) == OPTIMUM
    assert r.evaluations == 1 << 20


def test_single_variable():
    r = brute_force(QuboMatrix(1).add_linear(0, -1))
    assert r.minimizers == [(1,)] and r.best_energy == -1


def test_two_variable_ties():
    q = from_terms(2, [(0, 0, -1), (1, 1, -1), (0, 1, 3)])
    r = brute_force(q)
    assert r.best_energy == -1
    assert r.minimizers == [(0, 1), (1, 0)]


def test_zero_matrix_all_ties():
    r = brute_force(QuboMatrix(4, 2.5))
    assert r.best_energy == 2.5 and len(r.minimizers) == 16 and not r.overflow


def test_tie_cap_overflow():
    r = brute_force(QuboMatrix(11))
    assert len(r.minimizers) == 1024 and r.overflow


def test_size_guard():
    with pytest.raises(SizeGuardError):
        brute_force(QuboMatrix(31))


@pytest.mark.parametrize("seed", range(40))
def test_matches_dense_enumeration(seed):
    n = 1 + seed % 12
    q = rand_q(seed, n, integer=seed % 2 == 0)
    E = dense_energies(q, all_bits(n))
    r = brute_force(q)
    assert r.best_energy == pytest.approx(E.min(), rel=1e-9, abs=1e-9)
    for x in r.minimizers:
        assert qubo_energy(q, x) == pytest.approx(r.best_energy, rel=1e-9, abs=1e-9)
    assert r.minimizers == sorted(r.minimizers)
    if seed % 2 == 0:  # integer data: the tie set is exact
        idx = np.flatnonzero(E == E.min())
        expect = sorted(tuple((int(k) >> b) & 1 for b in range(n)) for k in idx)
        assert r.minimizers == expect


def test_chunked_search_equals_single_pass(monkeypatch):
    q = rand_q(5, 18, integer=True)
    monkeypatch.setenv("UCPQ_THREADS", "1")
    a = brute_force(q)
    monkeypatch.setenv("UCPQ_THREADS", "4")
    b = brute_force(q)
    assert a == b


# -- incremental updates --------------------------------------------------------

@given(st.integers(1, 12), st.integers(0, 2**31), st.data())
@settings(max_examples=150, deadline=None)
def test_gray_segment_minimum(n, seed, data):
    q = rand_q(seed, n)
    total = 1 << n
    k0 = data.draw(st.integers(0, total - 1))
    k1 = data.draw(st.integers(k0 + 1, total))
    best, ties, n_ties, _ = _kernels.gray_search(*q.adjacency(), k0, k1, 1024, 1e-9)
    gray = [k ^ (k >> 1) for k in range(k0, k1)]
    energies = [raw_energy(q, [(g >> b) & 1 for b in range(n)]) for g in gray]
    assert best == pytest.approx(min(energies), rel=1e-9, abs=1e-9)
    for m in ties[:n_ties]:
        x = [(int(m) >> b) & 1 for b in range(n)]
        assert raw_energy(q, x) == pytest.approx(best, rel=1e-9, abs=1e-9)


@given(st.integers(1, 12), st.integers(0, 2**31), st.floats(0.01, 1e3))
@settings(max_examples=150, deadline=None)
def test_anneal_tracks_energy(n, seed, temp):
    q = rand_q(seed, n)
    rng = np.random.default_rng(seed)
    pi, pj, pw = exchange_pairs(q)
    x0 = rng.integers(0, 2, n, dtype=np.int8)
    sweeps = 20
    bx, best = _kernels.anneal(*q.adjacency(), pi, pj, pw, x0,
                               rng.random((sweeps, n)), rng.random((sweeps, len(pi))),
                               np.full(sweeps, temp))
    assert best == pytest.approx(raw_energy(q, bx), rel=1e-9, abs=1e-9)
    assert best <= raw_energy(q, x0) + 1e-9


# -- annealing --------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        AnnealParams(restarts=0)
    with pytest.raises(ValueError):
        AnnealParams(temp_initial=1, temp_final=2)
    with pytest.raises(ValueError):
        AnnealParams(schedule="linear")


def test_default_temperatures(paper_qubo):
    p = AnnealParams.for_matrix(paper_qubo.matrix)
    mags = [abs(v) for v in paper_qubo.matrix.entries.values()]
    assert p.temp_initial == 10 * max(mags)
    assert p.temp_final == 0.01 * min(mags)
    assert (p.restarts, p.sweeps_per_restart) == (50, 1000)
    t = p.temperatures()
    assert t[0] == p.temp_initial and t[-1] == pytest.approx(p.temp_final)
    assert np.allclose(t[1:] / t[:-1], t[1] / t[0])


def test_anneal_paper(paper_qubo):
    r = simulated_annealing(paper_qubo, ACCEPTANCE_ANNEAL)
    assert r.best_energy == 370
    assert r.hits(370) >= 95
    assert len(r.restart_energies) == 100
    assert r.seed == 0 and r.solver == "anneal"


def test_exchange_moves_can_be_disabled(paper_qubo):
    base = dict(restarts=20, sweeps_per_restart=100, temp_initial=2e5, temp_final=0.1)
    with_pairs = simulated_annealing(paper_qubo, AnnealParams(**base))
    plain = simulated_annealing(paper_qubo, AnnealParams(**base, exchange_moves=False))
    assert plain.restart_energies != with_pairs.restart_energies
    assert all(e >= 370 for e in plain.restart_energies)


def test_anneal_zero_matrix():
    r = simulated_annealing(QuboMatrix(3, 4.0), AnnealParams(restarts=3, sweeps_per_restart=5))
    assert r.best_energy == 4.0


def test_anneal_deterministic_across_threads(paper_qubo, monkeypatch):
    p = AnnealParams.for_matrix(paper_qubo.matrix, restarts=8, sweeps_per_restart=50, seed=42)
    monkeypatch.setenv("UCPQ_THREADS", "1")
    a = simulated_annealing(paper_qubo, p)
    monkeypatch.setenv("UCPQ_THREADS", "3")
    b = simulated_annealing(paper_qubo, p)
    assert a == b
    other = simulated_annealing(paper_qubo, AnnealParams.for_matrix(
        paper_qubo.matrix, restarts=8, sweeps_per_restart=50, seed=43))
    assert other.restart_energies != a.restart_energies or other.minimizers != a.minimizers


@pytest.mark.parametrize("seed", range(15))
def test_exhaustive_never_worse(seed):
    q = rand_q(seed + 500, 4 + seed)
    ex = brute_force(q)
    sa = simulated_annealing(q, AnnealParams.for_matrix(q, restarts=3, sweeps_per_restart=30, seed=seed))
    assert ex.best_energy <= sa.best_energy + 1e-9
    for x in sa.minimizers:
        assert qubo_energy(q, x) == pytest.approx(sa.best_energy, rel=1e-9, abs=1e-9)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("UCPQ_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("UCPQ_THREADS", "0")
    assert worker_count() >= 1


# -- reports ---------------------------------------------------------------------

def test_report_paper(paper, paper_qubo):
    rep = solve_and_report(paper_qubo, paper)
    assert rep.feasible and rep.true_cost == 370 and rep.penalty_part == 0
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["bitstring"] == OPTIMUM and d["feasible"]


def test_report_anneal(paper, paper_qubo):
    rep = solve_and_report(paper_qubo, paper, "anneal", ACCEPTANCE_ANNEAL)
    assert rep.true_cost == 370


def test_report_unreachable_demand(paper):
    inst = UcpInstance("high", 5, paper.units, (9,) * 5)
    c = compile_tailored(inst, PAPER_PENALTIES)
    rep = solve_and_report(c, inst)
    assert not rep.feasible and rep.true_cost is None
    assert {v.kind for v in rep.violations} == {"demand"}
    assert rep.penalty_part > 0


def test_unknown_solver(paper, paper_qubo):
    with pytest.raises(ValueError):
        solve_and_report(paper_qubo, paper, "tabu")
