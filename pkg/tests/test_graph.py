"""Block-model tests: layer/block arithmetic, the ResNet-50 table, skip
topology validation, and effective-edge rewiring under drops.

The numeric assertions pin the derived per-block costs (multiplications,
bytes, output bits) to hand-computed values so any change to the block model
shows up as a hard failure, not a drifting benchmark.
"""

from __future__ import annotations

import numpy as np
import pytest

from resplan.errors import UnbridgeableDrop
from resplan.graph import (
    BlockSpec,
    Edge,
    LayerSpec,
    ResNetGraph,
    SkipTopology,
    build_resnet50,
    compute_load,
    default_skip_topology,
    effective_edges,
    memory_load,
    output_bits,
)

import oracles

DROPPABLE_IDS = [3, 4, 6, 7, 8, 10, 11, 12, 13, 14, 16, 17]
STEM_MULTS = 118_013_952
IDENTITY_MULTS = 218_365_952
TOTAL_MULTS = 3_855_925_248


def keep_vector(graph, drop):
    return [0 if (j + 1) in drop else 1 for j in range(graph.n_blocks)]


class TestLayerSpec:
    def test_conv_weight_and_mult_counts(self):
        layer = LayerSpec("conv", 3, 8, 16, 10, 800)
        assert layer.weight_count == 9 * 8 * 16
        assert layer.mult_count == 8 * 9 * 16 * 100

    def test_pool_has_no_weights_or_mults(self):
        layer = LayerSpec("pool", 3, 8, 8, 10, 800)
        assert layer.weight_count == 0
        assert layer.mult_count == 0

    def test_rejects_unknown_kind_and_bad_dims(self):
        with pytest.raises(ValueError):
            LayerSpec("dense", 1, 1, 1, 1, 1)
        with pytest.raises(ValueError):
            LayerSpec("conv", 0, 1, 1, 1, 1)
        for field in range(4):
            args = [1, 1, 1, 1]
            args[field] = 0
            with pytest.raises(ValueError):
                LayerSpec("conv", 1, *args)


class TestBlockSpec:
    def layers(self):
        return (
            LayerSpec("conv", 1, 4, 2, 3, 36),
            LayerSpec("conv", 3, 2, 4, 3, 18),
        )

    def test_all_layers_appends_shortcut(self):
        shortcut = LayerSpec("conv", 1, 4, 4, 3, 36)
        block = BlockSpec(2, 2, "conv_block", self.layers(), False, 36,
                          shortcut=shortcut)
        assert block.all_layers() == self.layers() + (shortcut,)
        plain = BlockSpec(2, 2, "conv_block", self.layers(), False, 36)
        assert plain.all_layers() == self.layers()

    def test_rejects_broken_channel_chain(self):
        bad = (
            LayerSpec("conv", 1, 4, 2, 3, 36),
            LayerSpec("conv", 3, 3, 4, 3, 18),
        )
        with pytest.raises(ValueError, match="channel chain"):
            BlockSpec(2, 2, "conv_block", bad, False, 36)

    def test_rejects_droppable_stem(self):
        with pytest.raises(ValueError, match="stem"):
            BlockSpec(1, 1, "stem", (LayerSpec("conv", 1, 1, 1, 1, 1),), True, 1)

    def test_identity_block_must_preserve_size(self):
        layers = (LayerSpec("conv", 1, 4, 4, 3, 36),)
        with pytest.raises(ValueError, match="input size"):
            BlockSpec(3, 2, "identity_block", layers, True, 37)
        with pytest.raises(ValueError, match="shortcut"):
            BlockSpec(3, 2, "identity_block", layers, True, 36,
                      shortcut=LayerSpec("conv", 1, 4, 4, 3, 36))


class TestSkipTopology:
    def test_rejects_spans_outside_window(self):
        with pytest.raises(ValueError, match="span"):
            SkipTopology(frozenset({(5, 5)}))
        with pytest.raises(ValueError, match="span"):
            SkipTopology(frozenset({(6, 2)}))
        with pytest.raises(ValueError, match="out of range"):
            SkipTopology(frozenset({(1, 0)}))

    def test_edges_into_is_sorted(self):
        topo = SkipTopology(frozenset({(4, 2), (4, 1), (5, 3)}))
        assert topo.edges_into(4) == [(4, 1), (4, 2)]
        assert topo.has_edge(5, 3)
        assert not topo.has_edge(4, 3)


class TestGraphValidation:
    def test_rejects_non_contiguous_block_ids(self):
        block = BlockSpec(2, 1, "stem", (LayerSpec("conv", 1, 1, 1, 1, 1),), False, 1)
        with pytest.raises(ValueError, match="contiguous"):
            ResNetGraph(blocks=(block,), skip=SkipTopology(frozenset()))

    def test_rejects_unbypassed_droppable_block(self):
        stem = BlockSpec(1, 1, "stem", (LayerSpec("conv", 1, 1, 1, 1, 1),), False, 4)
        mid = BlockSpec(2, 2, "identity_block",
                        (LayerSpec("conv", 1, 1, 1, 2, 4),), True, 4)
        last = BlockSpec(3, 2, "conv_block",
                         (LayerSpec("conv", 1, 1, 1, 1, 1),), False, 1)
        with pytest.raises(ValueError, match="no skip edge"):
            ResNetGraph(blocks=(stem, mid, last), skip=SkipTopology(frozenset()))
        # The same block in terminal position needs no bypass.
        last_droppable = BlockSpec(3, 2, "identity_block",
                                   (LayerSpec("conv", 1, 1, 1, 2, 4),), True, 4)
        g = ResNetGraph(blocks=(stem, BlockSpec(2, 2, "conv_block",
                                                (LayerSpec("conv", 1, 1, 1, 2, 4),),
                                                False, 4), last_droppable),
                        skip=SkipTopology(frozenset()))
        assert g.n_blocks == 3

    def test_rejects_edge_into_missing_block(self):
        stem = BlockSpec(1, 1, "stem", (LayerSpec("conv", 1, 1, 1, 1, 1),), False, 1)
        with pytest.raises(ValueError, match="nonexistent"):
            ResNetGraph(blocks=(stem,), skip=SkipTopology(frozenset({(3, 1)})))


class TestResNet50Table:
    def test_block_count_stages_and_droppables(self, resnet50):
        assert resnet50.n_blocks == 17
        stages = [b.stage for b in resnet50.blocks]
        assert stages == [1] + [2] * 3 + [3] * 4 + [4] * 6 + [5] * 3
        assert [b.block_id for b in resnet50.blocks if b.droppable] == DROPPABLE_IDS
        kinds = [b.kind for b in resnet50.blocks]
        assert kinds.count("stem") == 1
        assert kinds.count("conv_block") == 4
        assert kinds.count("identity_block") == 12

    def test_pinned_compute_costs(self, resnet50):
        assert compute_load(resnet50.block(1)) == STEM_MULTS
        for b in resnet50.blocks:
            if b.kind == "identity_block":
                assert compute_load(b) == IDENTITY_MULTS
        assert sum(compute_load(b) for b in resnet50.blocks) == TOTAL_MULTS

    def test_pinned_output_bits(self, resnet50):
        assert resnet50.block(1).out_elements == 56 * 56 * 64
        assert output_bits(resnet50.block(1)) == 56 * 56 * 64 * 4 * 8
        for b in resnet50.blocks[1:4]:
            assert output_bits(b) == 56 * 56 * 256 * 4 * 8
        assert output_bits(resnet50.block(17)) == 7 * 7 * 2048 * 4 * 8

    def test_memory_modes_agree_with_reference(self, resnet50):
        for b in resnet50.blocks:
            for mode in ("inputs", "weights", "both"):
                assert memory_load(b, mode) == oracles.block_memory(b, mode, 4)
            assert memory_load(b, "both") == (
                memory_load(b, "inputs") + memory_load(b, "weights")
            )

    def test_weight_bytes_scales_linearly(self, resnet50):
        b = resnet50.block(5)
        assert memory_load(b, "inputs", 8) == 2 * memory_load(b, "inputs", 4)
        assert output_bits(b, 1) * 4 == output_bits(b, 4)

    def test_input_side_validation(self):
        with pytest.raises(ValueError):
            build_resnet50(225)
        with pytest.raises(ValueError):
            build_resnet50(16)
        small = build_resnet50(32)
        assert small.block(17).out_elements == 1 * 1 * 2048

    def test_mode_and_bits_argument_validation(self, resnet50):
        with pytest.raises(ValueError, match="memory mode"):
            memory_load(resnet50.block(2), "cache")
        with pytest.raises(ValueError):
            output_bits(resnet50.block(2), 0)


class TestDefaultSkipTopology:
    def test_spans_each_droppable_and_each_adjacent_pair(self, resnet50):
        topo = resnet50.skip
        for j in DROPPABLE_IDS:
            if j + 1 <= 17:
                assert topo.has_edge(j + 1, j - 1), f"block {j} not bypassed"
        for j in DROPPABLE_IDS:
            if j + 1 in DROPPABLE_IDS and j + 2 <= 17:
                assert topo.has_edge(j + 2, j - 1), f"pair {j},{j + 1} not bypassed"
        # Count: 11 single bypasses (block 17 has no downstream block) plus
        # 7 pair bypasses (16,17 likewise runs off the end).
        assert len(topo.edges) == 18

    def test_terminal_block_has_no_bypass_and_needs_none(self, resnet50):
        assert not any(src < 17 < dst for dst, src in resnet50.skip.edges)
        edges = effective_edges(resnet50, keep_vector(resnet50, {17}))
        assert all(e.dst <= 16 for e in edges)

    def test_builder_matches_manual_edges(self):
        topo = default_skip_topology([3, 4], n_blocks=6)
        assert topo.edges == frozenset({(4, 2), (5, 3), (5, 2)})


class TestEffectiveEdges:
    def test_keep_all_is_the_plain_chain(self, resnet50):
        edges = effective_edges(resnet50, [1] * 17)
        assert len(edges) == 16
        assert all(e.kind == "direct" and e.dst == e.src + 1 for e in edges)

    def test_single_drop_reroutes_around_the_block(self, resnet50):
        edges = effective_edges(resnet50, keep_vector(resnet50, {3}))
        pairs = {(e.src, e.dst, e.kind) for e in edges}
        assert (2, 4, "skip") in pairs
        assert not any(e.src == 3 or e.dst == 3 for e in edges)
        assert (2, 3, "direct") not in pairs and (3, 4, "direct") not in pairs

    def test_adjacent_pair_uses_the_long_skip(self, resnet50):
        edges = effective_edges(resnet50, keep_vector(resnet50, {3, 4}))
        pairs = {(e.src, e.dst) for e in edges if e.kind == "skip"}
        assert pairs == {(2, 5)}

    def test_two_separate_drops_need_two_skips(self, resnet50):
        edges = effective_edges(resnet50, keep_vector(resnet50, {3, 6}))
        pairs = {(e.src, e.dst) for e in edges if e.kind == "skip"}
        assert pairs == {(2, 4), (5, 7)}

    def test_sigma_one_edge_joins_the_direct_edge(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            graph = None
            while graph is None:
                g = helpers_random_graph(rng)
                if any(dst - src == 1 for dst, src in g.skip.edges):
                    graph = g
            edges = effective_edges(graph, [1] * graph.n_blocks)
            for dst, src in graph.skip.edges:
                if dst - src == 1:
                    assert Edge(src=src, dst=dst, kind="skip") in edges

    def test_unbridgeable_run_raises_with_the_run_named(self, resnet50):
        with pytest.raises(UnbridgeableDrop, match="6..8"):
            effective_edges(resnet50, keep_vector(resnet50, {6, 7, 8}))

    def test_stem_drop_and_length_mismatch_rejected(self, resnet50):
        with pytest.raises(ValueError, match="stem"):
            effective_edges(resnet50, [0] + [1] * 16)
        with pytest.raises(ValueError, match="length"):
            effective_edges(resnet50, [1] * 16)

    def test_matches_reference_edge_rules_on_random_graphs(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            graph = helpers_random_graph(rng)
            m = graph.n_blocks
            for drop in helpers_drop_sets(graph):
                keep = [0 if (j + 1) in drop else 1 for j in range(m)]
                expected = oracles.edge_set(graph, keep)
                if expected is None:
                    with pytest.raises(UnbridgeableDrop):
                        effective_edges(graph, keep)
                else:
                    got = {(e.src, e.dst, e.kind) for e in effective_edges(graph, keep)}
                    assert got == set(expected)


def helpers_random_graph(rng):
    import helpers

    return helpers.random_graph(rng, n_blocks=int(rng.integers(4, 8)))


def helpers_drop_sets(graph):
    import itertools

    droppable = [b.block_id for b in graph.blocks if b.droppable]
    out = [()]
    for size in (1, 2):
        out.extend(itertools.combinations(droppable, size))
    return out
