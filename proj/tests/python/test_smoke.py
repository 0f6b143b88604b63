"""Smoke tests for the python bindings."""

import math

import pytest

import rankkit


def test_relevance_score():
    assert rankkit.relevance_score(2.0, 0.0) == pytest.approx(
        1.0 / (1.0 + math.exp(-2.0)), abs=1e-12
    )
    assert rankkit.relevance_score(3.0, 3.0) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        rankkit.relevance_score(float("nan"), 0.0)


def test_parse_and_format():
    out = rankkit.parse_output(
        "yes\n<contribution>states the decisive fact</contribution>\n"
        "<evidence>the decisive fact, rewritten to stand alone</evidence>"
    )
    assert out.verdict == rankkit.Verdict.yes
    assert out.contribution == "states the decisive fact"
    assert rankkit.format_score(out) == 1.0
    assert rankkit.label_match(out, "positive")
    assert not rankkit.label_match(out, "negative")

    bare_no = rankkit.parse_output("no")
    assert rankkit.format_score(bare_no) == 1.0
    assert rankkit.format_score(rankkit.parse_output("no but...")) == 0.0
    assert rankkit.format_score(rankkit.parse_output("perhaps")) == 0.0


def test_render_prompt():
    text, marker = rankkit.render_prompt("q", "d")
    assert text.endswith("<think>\n\n</think>\n\n")
    assert marker == len(text.encode("utf-8"))
    assert "<Query>: q" in text
    assert rankkit.DEFAULT_SYSTEM_PROMPT in text


def test_losses():
    assert rankkit.loss_point(0.8, 0.5) == pytest.approx(0.09, abs=1e-12)
    assert rankkit.loss_sft([-1.0, -2.0, -3.0], [False, True, True]) == 5.0
    assert rankkit.loss_total(0.09, 5.0) == pytest.approx(6.8, abs=1e-12)
    assert rankkit.loss_listwise_kl([0.5, 0.5], [0.5, 0.5]) == pytest.approx(
        0.0, abs=1e-12
    )
    assert rankkit.loss_rank_infonce([1.0, 1.0], [0.9, 0.9], 0) == pytest.approx(
        math.log(2.0), abs=1e-12
    )


def test_kappa_and_panel():
    assert rankkit.cohen_kappa([1, 1, 0, 0], [1, 1, 0, 0]) == 1.0
    assert rankkit.cohen_kappa([1, 1, 0, 0], [1, 0, 0, 1]) == pytest.approx(0.0)
    votes = {
        "a": [1, 0, 1, 0, 1, 1, 0, 0],
        "b": [1, 0, 1, 0, 1, 1, 0, 0],
        "c": [0, 1, 1, 0, 1, 0, 1, 0],
    }
    ids, matrix, n_shared = rankkit.pairwise_kappa_matrix(votes)
    assert n_shared == 8
    assert matrix[ids.index("a")][ids.index("b")] == pytest.approx(1.0)
    kept = rankkit.select_panel(votes, 2)
    assert len(kept) == 2
    assert not ({"a", "b"} <= set(kept))  # the duplicate pair cannot survive whole

    assert rankkit.majority_label({"a": "yes", "b": "yes", "c": "no"}) == "positive"


def test_balance_and_split():
    assert rankkit.bin_pair(1.0, 0) == (5, 0)
    assert rankkit.bin_pair(0.49, 100) == (2, 1)

    scores, lengths = [], []
    for row in range(6):
        for col_length in (10, 100, 200, 400, 800, 1500, 3000, 5000):
            for _ in range(3):
                scores.append((row + 0.5) / 6.0)
                lengths.append(col_length)
    assert rankkit.normalized_entropy(scores, lengths) == pytest.approx(1.0, abs=1e-12)

    retained, report = rankkit.balance(scores, lengths, target_h=0.99, seed=7)
    assert report["retained_fraction"] == 1.0
    assert len(retained) == len(scores)

    train, dev = rankkit.split_by_query([f"q{i}" for i in range(10)], 0.3, seed=1)
    assert len(dev) == 3
    assert set(train).isdisjoint(dev)


def test_ndcg_and_checkpoint_metrics():
    per_query, mean = rankkit.ndcg_at_k(
        {"q": {"A": 3, "B": 2, "C": 0}},
        {"q": [("B", 0.9), ("A", 0.8), ("C", 0.7)]},
        k=10,
    )
    expected = (3.0 + 7.0 / math.log2(3.0)) / (7.0 + 3.0 / math.log2(3.0))
    assert per_query["q"] == pytest.approx(expected, abs=1e-12)
    assert mean == pytest.approx(expected, abs=1e-12)

    metrics = rankkit.checkpoint_metrics(
        [0.9, 0.8, 0.3, 0.1], [0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]
    )
    assert metrics["auc"] == 1.0
    assert metrics["accuracy_at_half"] == 1.0
    assert metrics["pearson_teacher"] == pytest.approx(1.0, abs=1e-12)


def test_entities_and_tokens():
    entities = rankkit.regex_entities("lost 6.8 kg versus 4.1 kg (p<0.01)")
    assert {text for text, kind in entities} == {"6.8", "4.1", "0.01"}

    fidelity, found = rankkit.entity_fidelity(
        "the trial reported 6.8 kg", ["6.8", "9.9"]
    )
    assert fidelity == 0.5
    assert dict(found) == {"6.8": True, "9.9": False}

    assert rankkit.token_count("hello world") == 2
    assert rankkit.token_count("牡丹和芍药") == 5
