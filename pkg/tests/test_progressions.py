import json
from fractions import Fraction

import pytest

from coprime_adic.errors import InternalConsistencyError, PreconditionError
from coprime_adic.modarith import totient
from coprime_adic.progressions import (
    ProgressionWitness,
    admissible_t1,
    build_G_set,
    discrete_log_t_prime,
    generate_witnesses,
    m_modulus,
    nearest_valid_k,
    subgroup_of_powers,
    verify_witness,
)
from coprime_adic.stability import CoprimePair

from oracles import brute_witnesses, coprime_grid, psi_oracle

P32 = CoprimePair(3, 2)


def test_build_G_set_examples():
    assert build_G_set(P32, 2) == [1, 4, 7]
    assert build_G_set(P32, 1) == [1]
    assert build_G_set(CoprimePair(4, 3), 1) == [1, 9]


def test_build_G_set_matches_filter_definition():
    for m, n in coprime_grid(12):
        pair = CoprimePair(m, n)
        t1 = admissible_t1(pair)
        M = m_modulus(pair, t1)
        if M > 10**5:
            continue
        psi = psi_oracle(m, n)
        assert build_G_set(pair, t1) == [a for a in range(1, M + 1) if a % psi == 1 % psi]


def test_subgroup_examples():
    assert subgroup_of_powers(P32, 2) == [1, 4, 7]
    assert subgroup_of_powers(CoprimePair(4, 3), 1) == [1, 9]


def test_subgroup_threshold():
    assert admissible_t1(P32) == 2
    with pytest.raises(PreconditionError):
        subgroup_of_powers(P32, 1)
    # below threshold: reported, not asserted
    assert subgroup_of_powers(P32, 1, allow_below_threshold=True) == [1]


def test_subgroup_equality_on_small_grid():
    for m, n in coprime_grid(14):
        pair = CoprimePair(m, n)
        t1 = admissible_t1(pair)
        if m_modulus(pair, t1) > 10**6:
            continue
        assert subgroup_of_powers(pair, t1) == build_G_set(pair, t1), (m, n)


@pytest.mark.parametrize("k, expected", [(1, 0), (4, 1), (7, 2)])
def test_discrete_log_examples(k, expected):
    assert discrete_log_t_prime(P32, 2, k) == expected


def test_discrete_log_rejects_non_members():
    with pytest.raises(InternalConsistencyError):
        discrete_log_t_prime(P32, 2, 5)
    with pytest.raises(PreconditionError):
        discrete_log_t_prime(P32, 2, 10)


@pytest.mark.parametrize("k, t2, j", [(4, 2, 7), (1, 3, 7), (7, 1, 3)])
def test_first_witness_examples(k, t2, j):
    (w,) = generate_witnesses(P32, 2, k, 1)
    assert (w.t2, w.j) == (t2, j)
    assert w.identity_checked
    assert brute_witnesses(3, 2, 2, k, t2)[-1] == (t2, j)


def test_witnesses_form_progression():
    ws = generate_witnesses(P32, 2, 7, 3)
    assert [w.t2 for w in ws] == [1, 4, 7]
    assert all(verify_witness(w) for w in ws)


@pytest.mark.parametrize("m, n", [(3, 2), (4, 3), (5, 2), (5, 3), (7, 2)])
def test_witnesses_match_brute_force(m, n):
    pair = CoprimePair(m, n)
    t1 = admissible_t1(pair)
    assert m_modulus(pair, t1) <= 10**4
    # keep the j-scan of the oracle below 2**18 candidates per t2
    t2_max = max(1, 18 // (totient(m) * n.bit_length()))
    for k in build_G_set(pair, t1):
        expected = brute_witnesses(m, n, t1, k, t2_max)
        got = [(w.t2, w.j) for w in generate_witnesses(pair, t1, k, 40) if w.t2 <= t2_max]
        assert got == expected, (m, n, k)


def test_witness_invariants_on_grid():
    for m, n in coprime_grid(10):
        pair = CoprimePair(m, n)
        t1 = admissible_t1(pair)
        G = build_G_set(pair, t1)
        for k in G[:: max(1, len(G) // 4)]:
            ws = generate_witnesses(pair, t1, k, 3)
            gaps = {b.t2 - a.t2 for a, b in zip(ws, ws[1:])}
            assert gaps == {len(G)}
            for w in ws:
                B = n ** (w.t2 * totient(m))
                assert 1 <= w.j <= B and (w.j + 1) % n == 0
                assert k * B - w.j * m_modulus(pair, t1) == 1


def test_verify_witness_examples():
    w = ProgressionWitness(P32, 2, 4, 1, 2, 7)
    assert verify_witness(w)
    assert Fraction(4, 9) - Fraction(7, 16) == Fraction(1, 144)
    assert verify_witness(ProgressionWitness(P32, 2, 7, 2, 1, 3))
    assert not verify_witness(ProgressionWitness(P32, 2, 4, 1, 2, 5))


def test_witness_json():
    (w,) = generate_witnesses(P32, 2, 4, 1)
    rec = json.loads(w.to_json())
    assert rec == {
        "m": 3, "n": 2, "t1": 2, "k": 4, "t_prime": 1, "t2": 2, "j": 7,
        "m_modulus": "9", "n_modulus": "16",
    }


def test_large_moduli_stay_exact():
    ws = generate_witnesses(P32, 2, 4, 40)
    assert all(verify_witness(w) for w in ws)
    assert int(ws[-1].to_record()["n_modulus"]) > 2**200


def test_enumeration_cap():
    pair = CoprimePair(30, 29)
    with pytest.raises(PreconditionError):
        build_G_set(pair, admissible_t1(pair))
    with pytest.raises(PreconditionError):
        subgroup_of_powers(pair, admissible_t1(pair))


def test_nearest_valid_k():
    assert nearest_valid_k(P32, 2, 5) == 4
    assert nearest_valid_k(P32, 2, 6) == 7
    assert nearest_valid_k(P32, 2, 100) == 7
