"""Adversary circuits: runs, attack library, standard form, text format."""
import math

import numpy as np
import pytest

from spolab.circuits import (
    LocalUnitary,
    QueryCircuit,
    averaged_grover_reference,
    classical_probe,
    concrete_ensemble,
    dressed_standard_form,
    empty_circuit,
    format_circuit,
    grover_preimage,
    grover_reference,
    haar_unitary,
    hypergeometric_pmf,
    initial_state,
    output_distribution,
    parse_circuit,
    random_circuit,
    run,
    spo_ensemble,
    spo_success_probability,
    sponge_success_predicate,
    standard_form,
    success_probability,
    with_loading_query,
    zero_search_adversary,
    zero_search_success_predicate,
)
from spolab.oracles import BudgetError, concrete_backend, spo_backend, tspo_backend
from spolab.permutations import all_permutations, identity, parse_one_line, sample_uniform
from spolab.states import from_matrix, trace_distance

RNG = np.random.default_rng(31)


def test_empty_circuit_runs_to_zero_state():
    final = run(empty_circuit(4), concrete_backend(identity(4)))
    assert final.amps[0] == 1.0
    assert final.norm_sq() == pytest.approx(1.0)
    spo_final = run(empty_circuit(4), spo_backend(4))
    assert np.allclose(spo_final.amps.reshape(-1, 24)[0], 1 / math.sqrt(24))


def test_classical_probe_concrete():
    p = parse_one_line("2 3 1 4")
    final = run(classical_probe(4, 0, "forward"), concrete_backend(p))
    dist = output_distribution(final, "xy")
    assert dist[0, 1] == pytest.approx(1.0)  # pi(0) = 1
    final_inv = run(classical_probe(4, 0, "inverse"), concrete_backend(p))
    assert output_distribution(final_inv, "xy")[0, 2] == pytest.approx(1.0)
    assert classical_probe(4, 0).query_count == 1


def test_output_distribution_sums_to_one():
    circ = random_circuit(7, 2, 3, 4)
    final = run(circ, concrete_backend(sample_uniform(4, RNG)))
    dist = output_distribution(final, "xy")
    assert dist.shape == (4, 4)
    assert dist.sum() == pytest.approx(1.0, abs=1e-10)
    assert output_distribution(final, "x").sum() == pytest.approx(1.0, abs=1e-10)


def test_random_circuit_deterministic_and_unitary():
    a = random_circuit(99, 3, 2, 4)
    b = random_circuit(99, 3, 2, 4)
    assert a.query_count == 3
    for sa, sb in zip(a.steps, b.steps):
        if isinstance(sa, LocalUnitary):
            assert np.array_equal(sa.op.dense(), sb.op.dense())
        else:
            assert sa == sb
    zero_q = random_circuit(1, 0, 2, 4)
    assert zero_q.query_count == 0


def test_circuit_rejects_nonunitary_step():
    bad = from_matrix(np.diag([1.0, 0.5, 1.0, 1.0]))
    with pytest.raises(ValueError):
        QueryCircuit(4, (LocalUnitary(("X",), bad),))


def test_haar_unitary_is_unitary():
    u = haar_unitary(9, RNG)
    assert np.allclose(u.conj().T @ u, np.eye(9), atol=1e-12)


def test_budget_guard():
    circ = empty_circuit(8, work_dim=2 ** 23)
    with pytest.raises(BudgetError):
        initial_state(circ, spo_backend(8))


def test_backend_size_mismatch():
    with pytest.raises(ValueError):
        run(empty_circuit(4), concrete_backend(identity(8)))


def test_concrete_vs_spo_output_distributions():
    n = 4
    circ = random_circuit(17, 2, 2, n)
    avg = np.zeros((n, n))
    for p in all_permutations(n):
        avg += output_distribution(run(circ, concrete_backend(p)), "xy")
    avg /= 24
    spo_dist = output_distribution(run(circ, spo_backend(n)), "xy")
    assert np.abs(avg - spo_dist).max() < 1e-9


def test_concrete_vs_spo_ensembles():
    n = 4
    for seed in (1, 2):
        circ = random_circuit(seed, 2, 2, n)
        d = trace_distance(concrete_ensemble(circ, n),
                           spo_ensemble(circ, spo_backend(n)))
        assert d < 1e-9


def test_standard_form_structure():
    circ = random_circuit(3, 2, 2, 4)
    b = standard_form(circ)
    assert b.query_count == 2 * circ.query_count
    assert b.has_z
    zero_q = standard_form(empty_circuit(4))
    assert zero_q.query_count == 0 and zero_q.has_z
    with pytest.raises(ValueError):
        standard_form(b)


def test_standard_form_reproduces_tspo_run():
    n = 4
    circ = classical_probe(n, 1, "inverse")
    b = standard_form(circ)
    rng = np.random.default_rng(4)
    for _ in range(6):
        sigma, tau = sample_uniform(n, rng), sample_uniform(n, rng)
        ref = run(circ, tspo_backend(sigma, tau))
        got = run(b, tspo_backend(sigma, tau))
        got3 = run(dressed_standard_form(circ, sigma, tau), spo_backend(n))
        # compare on the common registers: Z ends in |0>
        got_z0 = got.amps.reshape(circ.work_dim, n, -1)[:, 0, :]
        got3_z0 = got3.amps.reshape(circ.work_dim, n, -1)[:, 0, :]
        assert np.abs(got_z0.reshape(-1) - ref.amps).max() < 1e-12
        assert np.abs(got3_z0.reshape(-1) - ref.amps).max() < 1e-12
        # no weight escapes the Z=|0> slice
        assert got.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_with_loading_query():
    circ = classical_probe(4, 2, "forward")
    loaded = with_loading_query(circ)
    assert loaded.query_count == circ.query_count + 1
    assert loaded.has_z
    p = parse_one_line("2 3 4 1")
    final = run(loaded, concrete_backend(p))
    # Y is parked in Z and reloaded: the readout is exactly (x, pi(x))
    assert output_distribution(final, "xy")[2, 3] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        with_loading_query(loaded)


def test_grover_preimage_structure():
    circ = grover_preimage(4, 2, 1, 3)
    assert circ.query_count == 6
    assert grover_preimage(4, 2, 1, 0).query_count == 0
    with pytest.raises(ValueError):
        grover_preimage(4, 4, 0, 1)
    with pytest.raises(ValueError):
        grover_preimage(4, 2, 9, 1)


def test_grover_matches_reference_fixed_pi():
    n_bits, c, target = 4, 2, 1
    space = 2 ** (n_bits - c)
    rng = np.random.default_rng(8)
    pred = sponge_success_predicate(n_bits, c, target)
    for _ in range(4):
        perm = sample_uniform(2 ** n_bits, rng)
        marked = sum(1 for x in range(space) if pred(x << c, perm))
        for k in (0, 1, 2):
            circ = grover_preimage(n_bits, c, target, k)
            got = success_probability(circ, perm, pred)
            assert got == pytest.approx(grover_reference(marked, space, k),
                                        abs=1e-9)


def test_zero_search_matches_reference_fixed_pi():
    n_bits, c = 4, 2
    space = 2 ** (n_bits - c)
    pred = zero_search_success_predicate(n_bits, c)
    perm = sample_uniform(16, np.random.default_rng(9))
    marked = sum(1 for x in range(space) if pred(x << c, perm))
    for k in (0, 1):
        got = success_probability(zero_search_adversary(n_bits, c, k), perm, pred)
        assert got == pytest.approx(grover_reference(marked, space, k), abs=1e-9)


def test_zero_iteration_uniform_guess():
    # success of the 0-iteration attack equals the marked fraction per pi
    n_bits, c = 4, 2
    pred = zero_search_success_predicate(n_bits, c)
    total = 0.0
    rng = np.random.default_rng(10)
    trials = 60
    for _ in range(trials):
        perm = sample_uniform(16, rng)
        total += success_probability(zero_search_adversary(n_bits, c, 0),
                                     perm, pred)
    # expectation over pi is exactly 2^-c
    assert abs(total / trials - 0.25) < 0.06


def test_hypergeometric_pmf():
    pmf = hypergeometric_pmf(16, 4, 4)
    assert float(sum(pmf)) == pytest.approx(1.0)
    # mean of the hypergeometric is draws * successes / population
    mean = float(sum(m * p for m, p in enumerate(pmf)))
    assert mean == pytest.approx(1.0)


def test_averaged_reference_matches_exhaustive_small():
    # against the exact ensemble at n_bits = 2 (N = 4, enumerable)
    n_bits, c, k = 2, 1, 1
    pred = sponge_success_predicate(n_bits, c, 1)
    circ = grover_preimage(n_bits, c, 1, k)
    vals = [success_probability(circ, p, pred) for p in all_permutations(4)]
    assert np.mean(vals) == pytest.approx(
        averaged_grover_reference(n_bits, c, k, "sponge"), abs=1e-10)


def test_spo_success_matches_concrete_small():
    n_bits, c, k = 2, 1, 1
    pred = sponge_success_predicate(n_bits, c, 1)
    circ = grover_preimage(n_bits, c, 1, k)
    concrete = np.mean([success_probability(circ, p, pred)
                        for p in all_permutations(4)])
    assert spo_success_probability(circ, pred) == pytest.approx(concrete,
                                                                abs=1e-10)


def test_circuit_text_roundtrip():
    text = """
# demo circuit
n 4
work 2
output xy
name demo
load 3
query fwd
unitary A,X seed=5
query inv
"""
    circ = parse_circuit(text)
    assert circ.n == 4 and circ.work_dim == 2 and circ.output == "xy"
    assert circ.query_count == 2
    again = parse_circuit(format_circuit(circ))
    assert again.query_count == 2
    final_a = run(circ, concrete_backend(parse_one_line("2 3 4 1")))
    final_b = run(again, concrete_backend(parse_one_line("2 3 4 1")))
    assert np.allclose(final_a.amps, final_b.amps)


def test_circuit_text_errors():
    with pytest.raises(ValueError):
        parse_circuit("query fwd\n")  # n missing
    with pytest.raises(ValueError):
        parse_circuit("n 4\nquery sideways\n")
    with pytest.raises(ValueError):
        parse_circuit("n 4\nunitary A\n")  # seed missing
    with pytest.raises(ValueError):
        parse_circuit("n 4\nbogus 3\n")
