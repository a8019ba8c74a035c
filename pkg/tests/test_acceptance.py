"""Acceptance suite: one test per shipped criterion.

Each test exercises its criterion at the stated tolerance and time limit
and prints one PASS/FAIL line (visible with ``pytest -s`` or in failure
output). Run the whole gate with:

    pytest tests/test_acceptance.py -v -s
"""

import json
import time

import numpy as np
import pytest

from quota.allocation import allocate_budget, redistribute_weights, solve_grid
from quota.assigners import merge_tokens, pool_adaptive, resize_bilinear
from quota.cli import main as cli_main
from quota.formats import write_embeddings
from quota.model import (
    DecoupledQuery,
    FrameEmbedding,
    NormalizedScores,
    ScoreVector,
)
from quota.prompts import build_frame_scoring_prompt
from quota.sampling import SamplingConfig, compute_frame_count
from quota.scoring import ScorerBinding, normalize_scores, score_frames

from conftest import StubScoringService, make_frame, make_video
from oracles import grid_search_best, merge_grid


def _criterion(name, limit_s, body):
    start = time.perf_counter()
    try:
        body()
    except BaseException:
        print(f"FAIL {name}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= limit_s:
        print(f"FAIL {name} (took {elapsed:.3f}s, limit {limit_s}s)")
        pytest.fail(f"{name} exceeded its {limit_s}s budget: {elapsed:.3f}s")
    print(f"PASS {name} ({elapsed * 1000:.1f} ms)")


def test_frame_count_table():
    """Duration-adaptive frame counts reproduce the published table."""
    cases = [
        (3600, 96, 64, 160),
        (900, 96, 64, 112),
        (10800, 96, 64, 160),
        (60, 128, 96, 129),
    ]

    def body():
        for duration, t_base, alpha, expected in cases:
            cfg = SamplingConfig(t_base=t_base, alpha=alpha)
            assert compute_frame_count(duration, cfg) == expected

    _criterion("frame-count-table", 0.001, body)


def test_budget_configurations():
    """Uniform weights consume the 25/50/100-percent budgets exactly."""

    def body():
        for frames, budget in [(16, 3136), (32, 6272), (64, 12544)]:
            weights = NormalizedScores(tuple([1.0 / frames] * frames))
            targets = allocate_budget(weights, budget)
            grids = [solve_grid(n) for n in targets]
            used = sum(h * w for h, w in grids)
            assert used == budget
            assert targets == [196] * frames
            assert grids == [(14, 14)] * frames

    _criterion("budget-configurations", 1.0, body)


def test_grid_solver_against_brute_force():
    """solve_grid equals brute-force argmax over the search set on [1, 1e5]."""

    def body():
        mismatches = [
            n for n in range(1, 100_001)
            if solve_grid(n) != grid_search_best(n)
        ]
        assert mismatches == []

    _criterion("grid-solver-oracle", 5.0, body)


def test_redistribution_suite():
    """10^4 random feasible instances reach a fixed point within bounds."""

    def body():
        rng = np.random.default_rng(20240817)
        for _ in range(10_000):
            count = int(rng.integers(1, 25))
            cap = int(rng.integers(1, 301))
            budget = int(rng.integers(count, count * cap + 1))
            raw = rng.random(count)
            raw[rng.random(count) < 0.2] = 0.0
            weights = normalize_scores(ScoreVector(tuple(raw.tolist())))
            # the pass loop inside redistribute_weights asserts conservation
            # per pass and never exceeds one pass per frame
            out = redistribute_weights(weights, budget, cap)
            values = np.asarray(out.weights)
            assert abs(values.sum() - 1.0) <= 1e-9
            assert (values * budget <= cap + 1e-6).all()

    _criterion("redistribution-suite", 10.0, body)


def test_assigner_invariants():
    """Constant fields, identity resize, pooling means, merge conservation,
    and merge equality with the exhaustive reference on all small grids."""

    def body():
        # constant-field preservation, exact, for all three assigners
        const = FrameEmbedding(np.full((6, 8, 3), 2.75, dtype=np.float32))
        assert (resize_bilinear(const, (4, 5)).data == 2.75).all()
        assert (resize_bilinear(const, (9, 11)).data == 2.75).all()
        assert (pool_adaptive(const, (3, 5)).data == 2.75).all()
        assert (merge_tokens(const, (4, 4)).data == 2.75).all()

        # bilinear identity is bit-exact
        frame = make_frame(14, 14, 8, seed=99)
        assert resize_bilinear(frame, (14, 14)).data.tobytes() == \
            frame.data.tobytes()

        # pooling preserves the global mean when the output divides the input
        frame = make_frame(12, 8, 4, seed=7)
        pooled = pool_adaptive(frame, (4, 4))
        assert abs(float(pooled.data.mean()) - float(frame.data.mean())) <= 1e-6

        # merge keeps exact token counts and conserves size mass
        for seed, (h, w), grid in [(0, (9, 9), (4, 6)), (1, (14, 14), (7, 7)),
                                   (2, (6, 10), (6, 3))]:
            out = merge_tokens(make_frame(h, w, 5, seed=seed), grid)
            assert out.data.shape[:2] == grid
            assert int(out.sizes.sum()) == h * w

        # merge equals the exhaustive greedy reference on every grid and
        # target with at most 8 tokens per axis (integer-valued tokens keep
        # both sides bit-identical and exercise tie-breaking)
        for h in range(1, 9):
            for w in range(1, 9):
                frame = make_frame(h, w, 3, seed=h * 13 + w, integer=True)
                for oh in range(1, h + 1):
                    for ow in range(1, w + 1):
                        ours = merge_tokens(frame, (oh, ow))
                        ref_vals, ref_sizes = merge_grid(
                            frame.data.tolist(), oh, ow
                        )
                        assert (
                            ours.data == np.asarray(ref_vals, dtype=np.float32)
                        ).all(), f"value mismatch at {(h, w)}->{(oh, ow)}"
                        assert ours.sizes.tolist() == [
                            [int(round(s)) for s in row] for row in ref_sizes
                        ], f"size mismatch at {(h, w)}->{(oh, ow)}"

    _criterion("assigner-invariants", 30.0, body)


def test_end_to_end_determinism(tmp_path):
    """Identical config and fixture produce byte-identical outputs."""

    def body():
        video = make_video(6, 5, 5, 4, seed=123)
        emb = tmp_path / "in.qtem"
        write_embeddings(video, emb)
        outputs = []
        for tag in ("a", "b"):
            out_e = tmp_path / f"{tag}.qtem"
            out_r = tmp_path / f"{tag}.json"
            code = cli_main([
                "run", "--embeddings", str(emb), "--query", "what is shown?",
                "--budget", "120", "--scorer", "mock:5",
                "--frames-are-presampled",
                "--out-embeddings", str(out_e), "--out-report", str(out_r),
            ])
            assert code == 0
            outputs.append((out_e.read_bytes(), out_r.read_bytes()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == outputs[1][1]
        report = json.loads(outputs[0][1])
        assert report["totals"]["used"] <= report["totals"]["budget"]

    _criterion("end-to-end-determinism", 5.0, body)


def test_prompt_conformance():
    """Scoring prompts carry the required binary-choice fragments verbatim."""

    def body():
        direct = build_frame_scoring_prompt(DecoupledQuery.direct("who wins?"))
        assert (
            "Does this frame contain any information to answer the given query"
            in direct
        )
        entity = build_frame_scoring_prompt(DecoupledQuery(
            strategy="entity-list", source_query="q",
            object_list=("cup", "table"),
        ))
        assert (
            "Does the frame contain any objects of the following list"
            in entity
        )
        for prompt in (direct, entity):
            assert "A. Yes. B. No." in prompt
            assert "Answer the letter directly." in prompt

    _criterion("prompt-conformance", 1.0, body)


def test_scorer_concurrency_determinism():
    """Serial and 8-way-concurrent remote scoring yield identical vectors."""

    def body():
        with StubScoringService(
            score_fn=lambda fid, p: (int(fid) % 89) / 88.0,
            max_delay_s=0.01,
        ) as service:
            refs = [str(i) for i in range(40)]
            prompt = "Question: anything?\nA. Yes. B. No.\nAnswer the letter directly."
            vectors = [
                score_frames(refs, prompt, ScorerBinding(
                    kind="remote", endpoint=service.url,
                    max_in_flight=max_in_flight,
                ))
                for max_in_flight in (1, 8)
            ]
            assert vectors[0] == vectors[1]

    _criterion("scorer-concurrency-determinism", 5.0, body)
