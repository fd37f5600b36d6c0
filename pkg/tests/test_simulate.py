import math
import random
from collections import defaultdict

import numpy as np
import pytest

from compbcast import (
    CoverDistribution,
    Partition,
    SimConfig,
    binning_simulate,
    broadcast_graph,
    build_vector_scheme,
    decode_check,
    enumerate_mis,
    make_instance,
    optimize_achievable,
    single_shot_execute,
    support,
    typicality_check,
)
from compbcast.model import tuple_rank
from compbcast.rates import VectorScheme
from compbcast.simulate import available_backends, build_plan, suggest_rates
from compbcast import rng as rngmod
from compbcast import _binning_py


# --- single-shot execution ---------------------------------------------------


def test_single_shot_example1(example1, table1_partition):
    rows = single_shot_execute(example1, table1_partition)
    assert len(rows) == 8
    for row in rows:
        for u in range(1, 4):
            assert row.decoded[u - 1] == example1.demand_value(u, row.x)


def vector_scheme_partition(inst, scheme: VectorScheme) -> Partition:
    """Support partition induced by (cell index, cell message) labels."""
    j = scheme.coordinate - 1
    groups = defaultdict(list)
    for x in support(inst):
        ci = next(i for i, cell in enumerate(scheme.cells) if x[j] in cell)
        label = scheme.messages[ci][tuple_rank(x, inst.q)]
        groups[(ci, label)].append(x)
    return Partition.from_cells(list(groups.values()))


def test_single_shot_example2_vector_scheme(example2):
    scheme = build_vector_scheme(
        example2, 2, [[0], [1, 2]], [["X1 + X3"], ["X1 + X2 + X3", "X2"]]
    )
    partition = vector_scheme_partition(example2, scheme)
    rows = single_shot_execute(example2, partition)
    assert len(rows) == 27
    for row in rows:
        for u in range(1, 4):
            assert row.decoded[u - 1] == example2.demand_value(u, row.x)


def test_single_shot_constant_single_cell():
    inst = make_instance(2, 2, [([1], "0"), ([], "1")])
    partition = Partition.from_cells([support(inst)])
    rows = single_shot_execute(inst, partition)
    assert all(row.cell == rows[0].cell for row in rows)


def test_single_shot_accepts_deterministic_cover(example1, example1_family, table1_cover):
    rows = single_shot_execute(example1, table1_cover, family=example1_family)
    assert len(rows) == 8


def test_single_shot_rejects_undecodable(example1):
    bad = Partition.from_cells([support(example1)])
    assert not decode_check(example1, bad).ok
    with pytest.raises(ValueError):
        single_shot_execute(example1, bad)


# --- typicality --------------------------------------------------------------


def test_typicality_check_monte_carlo():
    joint = {(a, b): 0.25 for a in (0, 1) for b in (0, 1)}
    rng = random.Random(1234)
    hits = 0
    for _ in range(100):
        xs, ys = [], []
        for _ in range(10_000):
            u = rng.random()
            pair = list(joint)[min(int(u * 4), 3)]
            xs.append(pair[0])
            ys.append(pair[1])
        hits += typicality_check(xs, ys, joint, 0.1)
    assert hits >= 99


def test_typicality_zero_probability_symbol():
    joint = {(0, 0): 0.5, (1, 1): 0.5, (0, 1): 0.0}
    assert not typicality_check([0, 1, 0], [0, 1, 1], joint, 0.9)
    assert typicality_check([0, 1], [0, 1], joint, 0.5)


def test_typicality_degenerate_slack():
    joint = {(0, 0): 0.125, (1, 1): 0.875}
    assert typicality_check([0], [0], joint, 8.0)
    assert not typicality_check([0], [0], joint, 0.5)
    with pytest.raises(ValueError):
        typicality_check([0, 1], [0], joint, 1.0)


# --- binning simulation ------------------------------------------------------


@pytest.fixture(scope="module")
def table1_setup(example1, example1_family, table1_cover):
    return example1, example1_family, table1_cover


def small_cfg(**kw):
    base = dict(
        n=6, codebook_rate=1.7, bin_rate=1.7, epsilon=0.5, epsilon_prime=0.4,
        trials=200, seed=31,
    )
    base.update(kw)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        small_cfg(n=0)
    with pytest.raises(ValueError):
        small_cfg(bin_rate=2.0)  # above the codebook rate
    with pytest.raises(ValueError):
        small_cfg(epsilon=0.3)  # below epsilon_prime
    with pytest.raises(ValueError):
        small_cfg(trials=0)


def test_suggest_rates_table1(table1_setup):
    inst, family, cover = table1_setup
    rp, rb = suggest_rates(inst, family, cover, margin=0.2)
    assert rp == pytest.approx(1.7, abs=1e-9)  # I(X; W) = H(W) = 1.5 plus margin
    assert rb == pytest.approx(1.7, abs=1e-9)  # max_i H(W | S_i) = 1.5 plus margin


def test_bit_reproducibility(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg()
    a = binning_simulate(inst, family, cover, cfg, collect_traces=True)
    b = binning_simulate(inst, family, cover, cfg, collect_traces=True)
    assert a.per_user == b.per_user
    assert a.traces == b.traces


def test_backends_agree(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=8, trials=400)
    py = binning_simulate(inst, family, cover, cfg, collect_traces=True, backend="python")
    if "compiled" in available_backends():
        cc = binning_simulate(
            inst, family, cover, cfg, collect_traces=True, backend="compiled"
        )
        assert cc.per_user == py.per_user
        assert cc.total_error_trials == py.total_error_trials
        assert cc.traces == py.traces


def test_threads_do_not_change_results(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=8, trials=300)
    one = binning_simulate(inst, family, cover, cfg, threads=1, collect_traces=True)
    four = binning_simulate(inst, family, cover, cfg, threads=4, collect_traces=True)
    assert one.per_user == four.per_user
    assert one.traces == four.traces


def test_one_bin_per_codeword_has_no_collisions(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=8, trials=1000)
    report = binning_simulate(inst, family, cover, cfg)
    assert report.num_bins == report.num_codewords
    assert all(u.er3 == 0 for u in report.per_user)


def test_single_codeword_forces_er1(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=4, codebook_rate=0.0, bin_rate=0.0, trials=400)
    report = binning_simulate(inst, family, cover, cfg)
    assert report.num_codewords == 1
    for u in report.per_user:
        assert u.er1 / cfg.trials >= 0.9
        assert u.er2 == 0 and u.er3 == 0


def self_identity_setup():
    """One user, no side information, demands the raw bit: the broadcast
    graph is a single edge, labels mirror the source."""
    inst = make_instance(2, 1, [([], "X1")])
    family = enumerate_mis(broadcast_graph(inst))
    cover = optimize_achievable(inst, family, mode="exhaustive").witness
    return inst, family, cover


def test_er3_nonincreasing_in_bin_rate():
    inst, family, cover = self_identity_setup()
    rates = (0.4, 0.8, 1.2)
    freqs = []
    trials = 4000
    for rb in rates:
        cfg = SimConfig(
            n=8, codebook_rate=1.2, bin_rate=rb, epsilon=0.6, epsilon_prime=0.5,
            trials=trials, seed=17,
        )
        report = binning_simulate(inst, family, cover, cfg)
        freqs.append(report.per_user[0].er3 / trials)
    assert freqs[0] > 0  # sweep actually exercises collisions
    for a, b in zip(freqs, freqs[1:]):
        sigma = math.sqrt(a * (1 - a) / trials + b * (1 - b) / trials)
        assert b <= a + 2 * sigma


def test_deterministic_n1_reduces_to_single_shot(table1_setup):
    inst, family, cover = table1_setup
    cfg = SimConfig(
        n=1, codebook_rate=10.0, bin_rate=10.0, epsilon=8.0, epsilon_prime=7.5,
        trials=500, seed=3,
    )
    report = binning_simulate(inst, family, cover, cfg)
    assert report.num_bins == report.num_codewords
    for u in report.per_user:
        assert u.demand_errors == 0


def test_kernel_matches_public_typicality(table1_setup):
    # replay codeword symbol streams and compare the kernel's box decisions
    # with the public frequency-slack criterion
    inst, family, cover = table1_setup
    cfg = small_cfg(n=8, trials=1)
    plan = build_plan(inst, family, cover, cfg)
    probs = np.asarray(cover.rows) * np.asarray(
        [p for p in inst.pmf if p > 0]
    )[:, None]
    joint = {
        (w, x): float(probs[x, w])
        for x in range(plan.num_support)
        for w in range(plan.num_labels)
    }
    sbase = rngmod.seed_base(cfg.seed)
    for trial in range(30):
        tbase = rngmod.trial_base(sbase, trial)
        src = rngmod.stream_base(tbase, rngmod.STREAM_SOURCE)
        xs = np.array(
            [rngmod.draw_symbol(plan.src_cdf, src, t) for t in range(cfg.n)]
        )
        for l in range(1, 40):
            ws = _binning_py._codeword_symbols(tbase, l, cfg.n, plan.w_cdf)
            expected = typicality_check(ws, list(xs), joint, cfg.epsilon_prime)
            got = _binning_py._codeword_typical_scalar(
                tbase, l, xs, plan.enc_forbidden, plan.enc_lo, plan.enc_up, plan.w_cdf
            )
            assert bool(got) == expected


def test_traces_csv_round_trip(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=6, trials=20)
    report = binning_simulate(inst, family, cover, cfg, collect_traces=True)
    text = report.traces_csv()
    lines = text.strip().splitlines()
    assert len(lines) == 1 + cfg.trials + 1  # header, rows, summary
    header = lines[0].split(",")
    assert header[:6] == ["trial", "n", "codebook_rate", "bin_rate", "l_star", "m_star"]
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == str(cfg.n)
    assert lines[-1].startswith("summary")


def test_trace_bin_consistency(table1_setup):
    inst, family, cover = table1_setup
    cfg = small_cfg(n=8, trials=100)
    report = binning_simulate(inst, family, cover, cfg, collect_traces=True)
    for t in report.traces:
        assert t.m_star == (t.l_star * report.num_bins) // report.num_codewords
        for dec, err in zip(t.decoded, t.errors):
            if err == "":
                continue
            assert err in ("er1", "er2", "er3")
