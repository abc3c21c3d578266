import networkx as nx
import numpy as np
import pytest

from calculus.builtins import (
    aggregate, aligned_branch, argmin_hood, fold_hood, map_hood, min_hood, mod_self, mux, nbr, nbr_uid, old,
    self_of,
)
from calculus.context import RoundContext, SensorSnapshot, execute_round
from calculus.field import NbrField
from calculus.trace import TraceCollisionError
from simulator.lockstep import LockstepNetwork


def _ctx(device=1, round_=1, prev=None, inbox=None, inputs=None):
    return RoundContext(device, round_, prev, inbox or {}, SensorSnapshot(app_inputs=inputs or {}))


def _stored(ctx, program):
    return execute_round(ctx, program)


def test_old_defaults_then_returns_previous():
    def program(ctx):
        return old(ctx, 0, ctx.inputs["v"])

    first, export = _stored(_ctx(inputs={"v": 7}), program)
    assert first == 0
    assert len(export.entries) == 1
    second, _ = _stored(_ctx(round_=2, prev=export, inputs={"v": 9}), program)
    assert second == 7


def test_old_with_update_function_counts_rounds():
    net = LockstepNetwork(nx.empty_graph(1), lambda ctx: old(ctx, 0, lambda x: x + 1))
    assert [net.step()[0] for _ in range(4)] == [0, 1, 2, 3]


def test_nbr_on_isolated_node_returns_self_default():
    result, export = _stored(_ctx(), lambda ctx: nbr(ctx, 4, 9))
    assert result.values == {1: 4}
    assert len(export.entries) == 1


def test_nbr_exchanges_uids_between_two_nodes():
    net = LockstepNetwork(nx.path_graph([1, 2]), lambda ctx: nbr(ctx, 0, ctx.uid))
    net.run(2)
    assert net.results[1].to_dict() == {1: 1, 2: 2}
    assert net.results[2].to_dict() == {1: 1, 2: 2}


def test_nbr_first_round_field_uses_default():
    net = LockstepNetwork(nx.path_graph([1, 2]), lambda ctx: nbr(ctx, 0, 1))
    assert net.step()[1].to_dict() == {1: 0}
    assert net.step()[1].to_dict() == {1: 1, 2: 1}


def test_share_variant_counts_hops():
    def program(ctx):
        source = ctx.uid == 0
        return nbr(ctx, 99, lambda hops: 0 if source else min_hood(ctx, hops, 99) + 1)

    graph = nx.path_graph(4)
    net = LockstepNetwork(graph, program)
    net.run(5)
    assert net.results == {0: 0, 1: 1, 2: 2, 3: 3}


def test_identical_context_gives_identical_export():
    def program(ctx):
        return fold_hood(ctx, lambda a, b: a + b, nbr(ctx, 1, old(ctx, 0, lambda x: x + 1)))

    _, export = _stored(_ctx(), program)
    ctx_a = _ctx(round_=2, prev=export)
    ctx_b = _ctx(round_=2, prev=export)
    result_a, export_a = execute_round(ctx_a, program)
    result_b, export_b = execute_round(ctx_b, program)
    assert result_a == result_b
    assert export_a.encode() == export_b.encode()


def test_repeated_call_site_without_iteration_collides():
    def program(ctx):
        return [old(ctx, 0, i) for i in range(2)]

    with pytest.raises(TraceCollisionError):
        _stored(_ctx(), program)


def test_iteration_scope_separates_loop_bodies():
    def program(ctx):
        values = []
        for i in range(3):
            with ctx.iteration(i):
                values.append(old(ctx, -1, i))
        return values

    net = LockstepNetwork(nx.empty_graph(1), program)
    assert net.step()[0] == [-1, -1, -1]
    assert net.step()[0] == [0, 1, 2]


def test_aggregate_functions_align_per_call_site():
    @aggregate
    def counter(ctx, step):
        return old(ctx, 0, lambda x: x + step)

    def program(ctx):
        return counter(ctx, 1), counter(ctx, 10)

    net = LockstepNetwork(nx.empty_graph(1), program)
    net.run(3)
    assert net.results[0] == (2, 20)


def test_fold_hood_examples():
    phi = NbrField(1, {1: 1, 2: 2, 3: 3}, 0)
    ctx = _ctx()
    assert fold_hood(ctx, lambda a, b: a + b, phi) == 6
    assert fold_hood(ctx, lambda a, b: a + b, phi, 0) == 5
    assert fold_hood(ctx, min, NbrField(1, {1: 42})) == 42


def test_fold_hood_ignores_entry_order():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ids = [int(i) for i in rng.permutation(10)]
        values = {i: int(rng.integers(0, 100)) for i in ids}
        phi = NbrField(ids[0], values)
        shuffled = NbrField(ids[0], dict(reversed(list(values.items()))))
        assert fold_hood(_ctx(), max, phi) == fold_hood(_ctx(), max, shuffled) == max(values.values())


def test_map_hood_examples():
    ctx = _ctx()
    field = NbrField(1, {1: 1, 2: 3}, 0)
    assert map_hood(ctx, lambda x: x * 2, field).to_dict() == {1: 2, 2: 6}
    assert map_hood(ctx, lambda x, y: x + y, NbrField(1, {1: 1, 2: 2}, 0), 10).to_dict() == {1: 11, 2: 12}
    assert map_hood(ctx, lambda x: x, field).to_dict() == field.to_dict()


def test_map_hood_extends_missing_ids_with_defaults():
    ctx = _ctx()
    left = NbrField(1, {1: 1, 2: 2}, 0)
    right = NbrField(1, {1: 10, 3: 30}, 100)
    result = map_hood(ctx, lambda a, b: a + b, left, right)
    assert result.to_dict() == {1: 11, 2: 102, 3: 30}
    assert result.default == 100


def test_self_and_mod_self():
    ctx = _ctx()
    phi = NbrField(1, {1: 3, 9: 9})
    assert self_of(ctx, phi) == 3
    assert mod_self(ctx, phi, 0).to_dict() == {1: 0, 9: 9}
    assert phi.to_dict() == {1: 3, 9: 9}


def test_nbr_uid_maps_neighbours_to_themselves():
    graph = nx.Graph([(5, 7), (5, 9)])
    net = LockstepNetwork(graph, lambda ctx: nbr_uid(ctx))
    net.run(2)
    assert net.results[5].to_dict() == {5: 5, 7: 7, 9: 9}


def test_mux_selects_values():
    ctx = _ctx()
    assert mux(ctx, True, 1, 2) == 1
    assert mux(ctx, False, 1, 2) == 2


def test_mux_on_field_condition_is_pointwise():
    ctx = _ctx()
    condition = NbrField(1, {1: True, 2: False, 3: True}, False)
    values = NbrField(1, {1: 10, 2: 20, 3: 30}, 0)
    assert mux(ctx, condition, values, -1).to_dict() == {1: 10, 2: -1, 3: 30}


def test_mux_evaluates_both_branches():
    def program(ctx):
        return mux(ctx, ctx.inputs["c"], nbr(ctx, 0, 1), nbr(ctx, 0, 2))

    _, with_true = _stored(_ctx(inputs={"c": True}), program)
    _, with_false = _stored(_ctx(inputs={"c": False}), program)
    assert set(with_true.entries) == set(with_false.entries)
    assert len(with_true.entries) == 2


def _branch_program(ctx):
    def body():
        return nbr(ctx, 0, 1)
    return aligned_branch(ctx, ctx.inputs["c"], body, body)


def test_opposite_branches_do_not_align():
    inputs = {1: {"c": True}, 2: {"c": False}}
    net = LockstepNetwork(nx.path_graph([1, 2]), _branch_program, inputs=lambda d, r: inputs[d])
    net.run(2)
    assert net.results[1].to_dict() == {1: 1}
    assert net.results[2].to_dict() == {2: 1}


def test_same_branch_aligns():
    net = LockstepNetwork(nx.path_graph([1, 2]), _branch_program, inputs=lambda d, r: {"c": False})
    net.run(2)
    assert net.results[1].to_dict() == {1: 1, 2: 1}


def test_branch_evaluates_only_selected_side():
    calls = []

    def program(ctx):
        return aligned_branch(ctx, True, lambda: calls.append("then") or 1, lambda: calls.append("else") or 2)

    result, export = _stored(_ctx(), program)
    assert result == 1
    assert calls == ["then"]
    assert export.entries == {}


def test_min_hood_breaks_ties_by_device_id():
    ctx = _ctx()
    phi = NbrField(3, {1: 5, 2: 5, 3: 7})
    assert min_hood(ctx, phi) == 5
    assert argmin_hood(ctx, phi) == 1
    assert argmin_hood(ctx, phi, 0) == 3


@aggregate
def _labelled(ctx, label):
    field = nbr(ctx, (label, ctx.uid))
    return all(value[0] == label for _, value in field.items())


def _random_nested_program(ctx):
    ok = True
    for i, even in enumerate(ctx.inputs["choices"]):
        with ctx.iteration(i):
            ok &= aligned_branch(
                ctx, even,
                lambda: _labelled(ctx, ("even", i)) and _labelled(ctx, ("even-2", i)),
                lambda: _labelled(ctx, ("odd", i)),
            )
    return ok


def test_alignment_never_mixes_call_sites():
    rng = np.random.default_rng(11)
    for trial in range(30):
        graph = nx.connected_watts_strogatz_graph(6, 2, 0.5, seed=trial)
        choices = {d: [bool(c) for c in rng.integers(0, 2, int(rng.integers(1, 4)))] for d in graph.nodes}
        net = LockstepNetwork(graph, _random_nested_program, inputs=lambda d, r: {"choices": choices[d]})
        for _ in range(3):
            assert all(net.step().values())
