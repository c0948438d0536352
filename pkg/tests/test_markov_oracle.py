import itertools
import json

import numpy as np
import pytest

from memwords import markov_oracle
from memwords.markov_oracle import (
    ChainSpecError,
    ReducibleChainError,
    StationaryLawError,
    ZeroProbabilityError,
    chain_to_dict,
    delta_exact,
    delta_profile,
    exact_conditional,
    is_memory_word,
    load_chain,
    make_chain,
    memory_word_report,
    path_is_possible,
    stationary_block_law,
    suffix_memory_length,
    word_probability,
)
from memwords.processes import sample_explicit
from memwords.seqcore import ContextIndex, Sequence, successor_counts

LAST_SYMBOL_ONLY = {(0, 0): [0.9, 0.1], (1, 0): [0.9, 0.1], (0, 1): [0.3, 0.7], (1, 1): [0.3, 0.7]}


def test_stationary_law_of_order_one_chain(chain):
    c = chain("order1")
    assert c.stationary[(0,)] == pytest.approx(2 / 3, abs=1e-12)
    assert c.stationary[(1,)] == pytest.approx(1 / 3, abs=1e-12)


def test_stationary_law_of_periodic_chain(chain):
    c = chain("two_cycle")
    assert c.stationary[(0,)] == pytest.approx(0.5, abs=1e-12)


def test_reducible_chain_is_rejected(chain_path):
    with pytest.raises(ReducibleChainError, match="2 closed classes"):
        load_chain(chain_path("reducible"))


def test_stationary_block_law_sums_to_one():
    kernel = {(0,): [0.5, 0.5], (1,): [0.25, 0.75]}
    law = stationary_block_law(kernel, 1, 2)
    assert sum(law.values()) == pytest.approx(1.0, abs=1e-12)
    assert law[(0,)] == pytest.approx(1 / 3, abs=1e-12)


def test_make_chain_validation():
    with pytest.raises(ChainSpecError, match="Missing kernel row"):
        make_chain(1, 2, {(0,): [1.0, 0.0]})
    with pytest.raises(ChainSpecError, match="not a probability vector"):
        make_chain(1, 2, {(0,): [0.6, 0.6], (1,): [0.5, 0.5]})
    with pytest.raises(ChainSpecError, match="expected 2"):
        make_chain(1, 2, {(0,): [1.0], (1,): [0.5, 0.5]})
    with pytest.raises(ChainSpecError, match="unknown contexts"):
        make_chain(0, 2, {(): [0.5, 0.5], (0,): [0.5, 0.5]})


def test_load_chain_rejects_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"order": 1, "kernel": {}}))
    with pytest.raises(ChainSpecError, match="invalid chain specification"):
        load_chain(path)


def test_chain_dict_matches_specification(chain, chain_path):
    raw = json.loads(chain_path("vlmc_order2").read_text())
    assert chain_to_dict(chain("vlmc_order2")) == raw


def test_word_probabilities(chain, path_probability):
    c = chain("vlmc_order2")
    for length in range(4):
        words = list(itertools.product(range(2), repeat=length))
        assert sum(word_probability(c, w) for w in words) == pytest.approx(1.0, abs=1e-12)
        for w in words:
            assert word_probability(c, w) == pytest.approx(path_probability(c, w, 5), abs=1e-12)
    assert word_probability(c, (0, 7)) == 0.0


def test_exact_conditional(chain):
    c = chain("order1")
    assert exact_conditional(c, (1,), 0) == pytest.approx(0.2, abs=1e-12)
    assert exact_conditional(c, (), 0) == pytest.approx(2 / 3, abs=1e-12)
    assert exact_conditional(c, (0, 1), 1) == pytest.approx(0.8, abs=1e-12)


def test_conditioning_on_null_word_raises(chain):
    c = chain("two_cycle")
    with pytest.raises(ZeroProbabilityError, match="probability zero"):
        exact_conditional(c, (0, 0), 1)
    with pytest.raises(ZeroProbabilityError):
        is_memory_word(c, (1, 1))


def test_vlmc_memory_words(chain):
    report = memory_word_report(chain("vlmc_order2"))
    assert report.minimal_words == frozenset({(1,), (0, 0), (1, 0)})
    assert report.longest_minimal_length == 2
    assert report.shortest_memory_length == 1


def test_vlmc_memory_words_match_brute_force_classifier(chain, path_probability):
    c = chain("vlmc_order2")

    def cond(w, x):
        return path_probability(c, w + (x,), 6) / path_probability(c, w, 6)

    def brute_memory(w):
        for extra in range(1, 3 - len(w) + 1):
            for z in itertools.product(range(2), repeat=extra):
                if path_probability(c, z + w, 6) <= 0:
                    continue
                if any(abs(cond(z + w, x) - cond(w, x)) > 1e-9 for x in range(2)):
                    return False
        return True

    memory = {w for ell in range(3) for w in itertools.product(range(2), repeat=ell) if brute_memory(w)}
    minimal = {w for w in memory if not any(w[j:] in memory for j in range(1, len(w) + 1))}
    assert memory_word_report(c).minimal_words == frozenset(minimal)


def test_order_zero_chain_has_empty_memory_word(chain):
    report = memory_word_report(chain("order0_skewed"))
    assert report.minimal_words == frozenset({()})
    assert report.longest_minimal_length == 0


def test_delta_exact(chain):
    c = chain("order1")
    assert delta_exact(c, 0) == pytest.approx(7 / 15, abs=1e-12)
    assert delta_exact(c, 1) == 0.0
    assert delta_exact(c, 4) == 0.0
    with pytest.raises(ValueError):
        delta_exact(c, -1)


def test_delta_profile_vanishes_from_the_order_on(chain):
    profile = delta_profile(chain("order3_skewed"))
    assert len(profile) == 4
    assert all(d > 0.05 for d in profile[:3])
    assert profile[3] == 0.0


def test_path_is_possible(chain):
    c = chain("two_cycle")
    assert path_is_possible(c, Sequence([0, 1, 0, 1]))
    assert not path_is_possible(c, Sequence([0, 1, 1]))
    assert not path_is_possible(c, Sequence([0, 2]))


def test_suffix_memory_length(chain):
    c = chain("vlmc_order2")
    assert suffix_memory_length(c, Sequence([0, 0, 1])) == 1
    assert suffix_memory_length(c, Sequence([1, 0, 0])) == 2
    assert suffix_memory_length(c, Sequence([1, 1, 0])) == 2


def test_suffix_memory_length_of_short_path(chain):
    with pytest.raises(ValueError, match="too short"):
        suffix_memory_length(chain("vlmc_order2"), Sequence([0]))


def test_suffix_memory_length_of_impossible_path(chain):
    with pytest.raises(ZeroProbabilityError):
        suffix_memory_length(chain("two_cycle"), Sequence([1, 1]))


def test_unsolved_stationary_law_is_rejected(monkeypatch):
    monkeypatch.setattr(markov_oracle, "_solve_stationary", lambda sub: np.full(len(sub), 1.0 / len(sub)))
    with pytest.raises(StationaryLawError, match="residual"):
        make_chain(1, 2, {(0,): [0.9, 0.1], (1,): [0.2, 0.8]})


@pytest.mark.parametrize("name", ["order1", "order1_skewed", "vlmc_order2", "order2_skewed", "order3_skewed"])
def test_memory_words_are_closed_under_left_extension(chain, name):
    c = chain(name)
    for w in memory_word_report(c).memory_words:
        for a in range(c.alphabet_size):
            aw = (a,) + w
            if len(aw) <= c.order + 1 and word_probability(c, aw) > 0:
                assert is_memory_word(c, aw)


def test_delta_vanishes_iff_every_word_is_a_memory_word(chain):
    chains = [chain("order1"), chain("vlmc_order2"), chain("order3_skewed"), make_chain(2, 2, LAST_SYMBOL_ONLY)]
    for c in chains:
        for k in range(c.order + 1):
            words = [w for w in itertools.product(range(c.alphabet_size), repeat=k) if word_probability(c, w) > 0]
            all_memory = all(is_memory_word(c, w) for w in words)
            assert (delta_exact(c, k) <= 1e-12) == all_memory


@pytest.mark.parametrize("name,order", [("order1", 1), ("order1_skewed", 1), ("vlmc_order2", 2), ("order2_skewed", 2), ("order3_skewed", 3)])
def test_longest_minimal_word_matches_true_order(chain, name, order):
    assert memory_word_report(chain(name)).longest_minimal_length == order


def test_longest_minimal_word_below_declared_order():
    report = memory_word_report(make_chain(2, 2, LAST_SYMBOL_ONLY))
    assert report.longest_minimal_length == 1
    assert report.minimal_words == frozenset({(0,), (1,)})


@pytest.mark.slow
def test_successors_of_memory_words_follow_exact_conditional(chain):
    c = chain("vlmc_order2")
    index = ContextIndex(sample_explicit(c, 10**6, 11))
    for w in memory_word_report(c).minimal_words:
        counts = successor_counts(index, w)
        total = sum(counts.values())
        for x in range(c.alphabet_size):
            assert counts.get(x, 0) / total == pytest.approx(exact_conditional(c, w, x), abs=0.01)
