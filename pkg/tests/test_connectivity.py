import random

import pytest

from catgraph.connectivity import (
    LayeredPushState,
    ParityProgram,
    connect_det,
    connect_det_tape_bits,
    connect_rand,
    connect_rand_tape_bits,
    connect_revertible,
    connect_revertible_tape_bits,
    iteration_count,
    nonzero_value_bound,
    path_count_bound,
    revert_query,
    st_count_mod,
    st_nonzero_mod,
)
from catgraph.graphs import AdjacencyGraph
from catgraph.oracles import bfs_reach, count_paths_layers, zeta_table
from catgraph.tape import CatalyticTape, WorkspaceMeter, allocate_registers, make_tape

from helpers import TAPE_PROFILES, random_graph


def valid_file(tape, base, count, width, q):
    """Allocate and clamp every register into the valid range."""
    file = allocate_registers(tape, base, count, width, q)
    for i in range(count):
        file.write(i, file.read(i) % file._limit)
    return file


def layered_file(g, T, q, profile="random", seed=0, extra_width=4):
    width = max(q.bit_length() + extra_width, 6)
    tape = make_tape((T + 1) * g.n * width, profile, seed)
    return tape, valid_file(tape, 0, (T + 1) * g.n, width, q)


def parity_file(g, q, profile="random", seed=0, extra_width=4):
    width = max(q.bit_length() + extra_width, 6)
    tape = make_tape(2 * g.n * width, profile, seed)
    return tape, valid_file(tape, 0, 2 * g.n, width, q)


# --- layered counting ---------------------------------------------------------


def test_count_path_graph():
    g = AdjacencyGraph.from_edges(3, [(0, 1), (1, 2)])
    tape, file = layered_file(g, 2, 7)
    assert st_count_mod(g, 0, 2, 2, 7, file) == 1


def test_count_diamond():
    g = AdjacencyGraph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    tape, file = layered_file(g, 2, 7)
    assert st_count_mod(g, 0, 3, 2, 7, file) == 2


def test_count_disconnected_zero():
    g = AdjacencyGraph.from_edges(4, [(0, 1), (2, 3)])
    for T in (0, 1, 3):
        tape, file = layered_file(g, T, 11, seed=T)
        assert st_count_mod(g, 0, 3, T, 11, file) == 0


def test_count_restores_tape():
    rng = random.Random(0)
    for trial in range(25):
        g = random_graph(rng, rng.randint(1, 6), p=0.5)
        T = rng.randint(0, 4)
        q = rng.randint(3, 4096)
        profile = TAPE_PROFILES[trial % 3]
        tape, file = layered_file(g, T, q, profile, seed=trial)
        before = tape.digest()
        st_count_mod(g, rng.randrange(g.n), rng.randrange(g.n), T, q, file)
        assert tape.digest() == before


def test_push_counts_match_dp_per_register():
    # register difference across b=1 / b=0 equals the path count, per (i, v)
    rng = random.Random(1)
    for trial in range(40):
        g = random_graph(rng, rng.randint(1, 6), p=0.5)
        n = g.n
        s = rng.randrange(n)
        T = rng.randint(0, 4)
        q = rng.randint(2, 4096)
        tape, file = layered_file(g, T, q, TAPE_PROFILES[trial % 3], seed=trial)
        counts = count_paths_layers(g, s, T)

        state = LayeredPushState(g, s, T, file)
        alphas = {}
        for b in (0, 1):
            state.run_push(b)
            alphas[b] = [file.residue(i) for i in range(file.count)]
            state.run_reverse(b)
        for i in range(T + 1):
            for v in range(n):
                idx = i * n + v
                diff = (alphas[1][idx] - alphas[0][idx]) % q
                assert diff == counts[i][v] % q, (trial, i, v)


def test_layer_push_reverse_is_inverse():
    rng = random.Random(2)
    for trial in range(20):
        g = random_graph(rng, rng.randint(2, 6), p=0.6)
        T = rng.randint(1, 4)
        q = rng.randint(2, 100)
        tape, file = layered_file(g, T, q, seed=trial)
        state = LayeredPushState(g, rng.randrange(g.n), T, file)
        before = tape.digest()
        state.run_push(1)
        state.run_reverse(1)
        assert tape.digest() == before


def test_batched_layer_push_equals_sequential_edge_pushes():
    rng = random.Random(3)
    for trial in range(15):
        g = random_graph(rng, rng.randint(2, 6), p=0.6)
        n = g.n
        q = rng.randint(2, 60)
        tape, file = layered_file(g, 1, q, seed=trial)
        shadow = CatalyticTape(tape.nbits, bytearray(tape.snapshot()))
        sfile = allocate_registers(shadow, 0, file.count, file.width, q)
        state = LayeredPushState(g, 0, 1, file)
        state.layer_push(0)
        for v in range(n):
            for u in g.in_neighbors(v):
                sfile.add_reg(n + v, u, 1)
        assert tape.digest() == shadow.digest()


# --- two-bank nonzero ---------------------------------------------------------


def test_nonzero_single_vertex_base_case():
    g = AdjacencyGraph.from_edges(1, [])
    tape, file = parity_file(g, 5)
    assert st_nonzero_mod(g, 0, 0, 0, 5, file) == 1


def test_nonzero_path_graph():
    g = AdjacencyGraph.from_edges(3, [(0, 1), (1, 2)])
    want = zeta_table(g, 0, 2)[2][2]
    assert want > 0
    for q in (7, 5, 64, 4096):
        tape, file = parity_file(g, q, seed=q)
        assert st_nonzero_mod(g, 0, 2, 2, q, file) == want % q


def test_nonzero_no_path_is_zero():
    g = AdjacencyGraph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    for T in (0, 2, 5, 9):
        tape, file = parity_file(g, 13, seed=T)
        assert st_nonzero_mod(g, 0, 3, T, 13, file) == 0


def test_nonzero_matches_exact_recurrence():
    rng = random.Random(4)
    for trial in range(40):
        g = random_graph(rng, rng.randint(1, 6), p=0.45)
        s, t = rng.randrange(g.n), rng.randrange(g.n)
        T = rng.randint(0, 6)
        q = rng.randint(2, 4096)
        tape, file = parity_file(g, q, TAPE_PROFILES[trial % 3], seed=trial)
        before = tape.digest()
        got = st_nonzero_mod(g, s, t, T, q, file)
        assert tape.digest() == before
        assert got == zeta_table(g, s, T)[T][t] % q


def test_parity_program_reset():
    rng = random.Random(5)
    for trial in range(20):
        g = random_graph(rng, rng.randint(1, 6), p=0.5)
        T = rng.randint(0, 5)
        q = rng.randint(2, 200)
        tape, file = parity_file(g, q, seed=trial)
        prog = ParityProgram(g, 0, T, file)
        before = tape.digest()
        prog.run_push(1)
        prog.run_reverse(1)
        assert tape.digest() == before


def test_extraction_strategies_agree():
    # wide power-of-two modulus computed both ways
    g = AdjacencyGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    q = 1 << 26
    tape, file = parity_file(g, q, seed=9, extra_width=3)
    streamed = st_nonzero_mod(g, 0, 3, 4, q, file, _force_extract="horner")
    danced = st_nonzero_mod(g, 0, 3, 4, q, file, _force_extract="dance")
    default = st_nonzero_mod(g, 0, 3, 4, q, file)
    assert streamed == danced == default
    assert default == zeta_table(g, 0, 4)[4][3] % q


# --- revert queries -----------------------------------------------------------


def test_revert_query_before_any_push_returns_current():
    g = AdjacencyGraph.from_edges(3, [(0, 1), (1, 2)])
    tape, file = layered_file(g, 2, 7)
    state = LayeredPushState(g, 0, 2, file)
    for i in range(3):
        for v in range(3):
            assert revert_query(state, (i, v)) == file.read(i * 3 + v)


def test_revert_query_after_full_push_matches_snapshot():
    rng = random.Random(6)
    for trial in range(15):
        g = random_graph(rng, rng.randint(2, 6), p=0.5)
        n, T = g.n, rng.randint(1, 4)
        q = rng.randint(2, 500)
        tape, file = layered_file(g, T, q, seed=trial)
        tau = [file.read(i) for i in range(file.count)]
        state = LayeredPushState(g, rng.randrange(n), T, file)
        state.run_push(1)
        for i in range(T + 1):
            for v in range(n):
                assert revert_query(state, (i, v)) == tau[i * n + v], (trial, i, v)
        # queries leave the tape untouched and execution can resume
        state.run_reverse(1)
        assert [file.read(i) for i in range(file.count)] == tau


def test_revert_query_at_random_pause_points():
    rng = random.Random(7)
    for trial in range(10):
        g = random_graph(rng, rng.randint(2, 6), p=0.5)
        n, T = g.n, rng.randint(1, 4)
        q = rng.randint(2, 500)
        tape, file = layered_file(g, T, q, seed=trial)
        tau = [file.read(i) for i in range(file.count)]
        probes = []

        def pause(state, stage):
            for _ in range(3):
                i = rng.randint(0, T)
                v = rng.randrange(n)
                probes.append(revert_query(state, (i, v)) == tau[i * n + v])

        st_count_mod(g, 0, n - 1, T, q, file, pause=pause)
        assert probes and all(probes)


# --- drivers ------------------------------------------------------------------


def test_det_single_edge_both_directions():
    g = AdjacencyGraph.from_edges(2, [(0, 1)])
    assert connect_det(g, 0, 1).verdict == "path"
    assert connect_det(g, 1, 0).verdict == "no-path"


def test_det_self_pair_is_path():
    g = AdjacencyGraph.from_edges(1, [])
    assert connect_det(g, 0, 0).verdict == "path"


def test_det_matches_bfs_small_random():
    rng = random.Random(8)
    for trial in range(40):
        g = random_graph(rng, rng.randint(1, 7), p=0.4)
        tape = make_tape(max(connect_det_tape_bits(g.n), 1), TAPE_PROFILES[trial % 3], trial)
        reach = bfs_reach(g)
        s, t = rng.randrange(g.n), rng.randrange(g.n)
        ans = connect_det(g, s, t, tape=tape)
        assert (ans.verdict == "path") == reach[s][t]
        assert ans.metrics.tape_restored
        assert not ans.metrics.aborted


def test_rand_soundness_no_false_positives():
    g = AdjacencyGraph.from_edges(3, [(1, 0), (2, 1)])
    tape = make_tape(connect_rand_tape_bits(3), "random", 0)
    for seed in range(50):
        ans = connect_rand(g, 0, 2, seed=seed, tape=tape)
        assert ans.verdict in ("no-path", "abort")
        assert ans.metrics.tape_restored


def test_rand_finds_paths():
    rng = random.Random(9)
    found = total = 0
    for trial in range(40):
        g = random_graph(rng, rng.randint(2, 8), p=0.5)
        reach = bfs_reach(g)
        pairs = [(s, t) for s in range(g.n) for t in range(g.n) if s != t and reach[s][t]]
        if not pairs:
            continue
        s, t = pairs[rng.randrange(len(pairs))]
        ans = connect_rand(g, s, t, seed=trial)
        total += 1
        found += ans.verdict == "path"
        assert ans.metrics.tape_restored
    assert total > 20
    assert found / total >= 0.5


def test_rand_replay_deterministic():
    g = AdjacencyGraph.from_edges(4, [(0, 1), (1, 2), (3, 0)])
    tape = make_tape(connect_rand_tape_bits(4), "random", 5)
    a = connect_rand(g, 0, 2, seed=31, tape=tape)
    b = connect_rand(g, 0, 2, seed=31, tape=tape)
    assert a.verdict == b.verdict
    assert a.metrics.elapsed_steps == b.metrics.elapsed_steps


def test_iteration_count_scaling():
    assert iteration_count(2, 8.0) == 8
    assert iteration_count(10, 8.0) == 27
    assert iteration_count(2, 1.0) == 1


def test_revertible_matches_bfs_and_restores():
    rng = random.Random(10)
    for trial in range(15):
        g = random_graph(rng, rng.randint(2, 7), p=0.4)
        tape = make_tape(connect_revertible_tape_bits(g), TAPE_PROFILES[trial % 3], trial)
        before = tape.digest()
        s, t = rng.randrange(g.n), rng.randrange(g.n)
        ans = connect_revertible(g, s, t, seed=trial, tape=tape)
        assert (ans.verdict == "path") == bfs_reach(g)[s][t]
        assert ans.metrics.tape_restored
        assert tape.digest() == before


def test_revertible_queries_return_original_bits():
    rng = random.Random(11)
    g = random_graph(rng, 6, p=0.45)
    bits = connect_revertible_tape_bits(g)
    tape = make_tape(bits, "random", 3)
    snap = tape.snapshot()
    checks = []

    def hook(point, query):
        if rng.random() < 0.05:
            for _ in range(2):
                idx = rng.randrange(bits)
                want = (snap[idx >> 3] >> (idx & 7)) & 1
                checks.append(query(idx) == want)

    ans = connect_revertible(g, 0, 5, seed=4, tape=tape, pause_hook=hook)
    assert checks and all(checks)
    assert ans.metrics.tape_restored


def test_revertible_untouched_region_reads_current_value():
    # an isolated vertex in the base graph yields irrelevant registers
    g = AdjacencyGraph.from_edges(4, [(0, 1)])
    bits = connect_revertible_tape_bits(g)
    tape = make_tape(bits, "random", 8)
    snap = tape.snapshot()
    seen = []

    def hook(point, query):
        if point.stage.startswith("push") and not seen:
            for idx in range(bits):
                if query(idx) != ((snap[idx >> 3] >> (idx & 7)) & 1):
                    seen.append(idx)

    ans = connect_revertible(g, 0, 1, seed=0, tape=tape, pause_hook=hook)
    assert ans.verdict == "path"
    assert not seen


def test_bounds_helpers():
    assert path_count_bound(3, 2) == 9
    assert nonzero_value_bound(2) == 10
    assert connect_det_tape_bits(2) == 2 * 2 * 4  # l = ceil(log2 10) = 4


def test_driver_rejects_bad_vertices():
    g = AdjacencyGraph.from_edges(2, [(0, 1)])
    with pytest.raises(ValueError):
        connect_det(g, 0, 5)


def test_workspace_meter_is_used_and_released():
    g = AdjacencyGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    meter = WorkspaceMeter()
    ans = connect_det(g, 0, 3, meter=meter)
    assert ans.metrics.workspace_peak_bits > 0
    assert meter.bits_in_use == 0
    steps_meter = WorkspaceMeter()
    connect_rand(g, 0, 3, seed=1, meter=steps_meter)
    assert steps_meter.bits_in_use == 0


def test_drivers_reject_explicit_self_loops():
    g = AdjacencyGraph.from_edges(2, [(0, 0), (0, 1)])
    with pytest.raises(ValueError):
        connect_det(g, 0, 1)
    with pytest.raises(ValueError):
        connect_rand(g, 0, 1, seed=0)
    with pytest.raises(ValueError):
        connect_revertible(g, 0, 1, seed=0)
