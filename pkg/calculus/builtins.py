"""
Field-calculus builtins.

Each builtin takes the round context first. Builtins that exchange or keep
state (`old`, `nbr`, `nbr_uid`) write exactly one export entry at the trace
key of their call site; the others are pure functions over fields.
"""

import functools
from typing import Any, Callable, Optional

from calculus.codec import encode_value
from calculus.context import RoundContext
from calculus.field import DeviceId, NbrField, is_field
from calculus.trace import Tag, call_site

_MISSING = object()


def _claim(ctx: RoundContext, tag: Tag) -> int:
    return ctx.cursor.claim(ctx.cursor.key_for(tag))


def _store(ctx: RoundContext, key: int, value: Any) -> None:
    ctx.cursor.write(key, encode_value(value))


def aggregate(func: Callable[..., Any]) -> Callable[..., Any]:
    """
    Mark a function as an aggregate function.

    Each call pushes a trace frame for the calling expression, so the
    builtins inside align per call site rather than per definition.
    """
    @functools.wraps(func)
    def wrapper(ctx: RoundContext, *args: Any, **kwargs: Any) -> Any:
        with ctx.cursor.frame(Tag(call_site(1))):
            return func(ctx, *args, **kwargs)
    return wrapper


def old(ctx: RoundContext, v0: Any, v: Any = _MISSING) -> Any:
    """
    Value from the previous round of this device.

    Args:
        ctx: Round context
        v0: Value returned when nothing was stored yet
        v: Value to store for the next round, or a function of the returned
            value computing it; defaults to v0

    Returns:
        The previously stored value, or v0 on the first evaluation
    """
    return _old(ctx, Tag(call_site(1)), v0, v)


def _old(ctx: RoundContext, tag: Tag, v0: Any, v: Any) -> Any:
    key = _claim(ctx, tag)
    current = ctx.previous(key, _MISSING)
    if current is _MISSING:
        current = v0
    if v is _MISSING:
        v = v0
    _store(ctx, key, v(current) if callable(v) else v)
    return current


def nbr(ctx: RoundContext, v0: Any, v: Any = _MISSING) -> Any:
    """
    Neighbouring field of the values aligned neighbours stored here last round.

    With a function as second argument this is the share variant: the
    function receives the field, its result is stored and returned.

    Args:
        ctx: Round context
        v0: Default for devices (self included) with no stored value
        v: Value to store, or a function from the field to the value to store

    Returns:
        NbrField, or the function's result for the share variant
    """
    return _nbr(ctx, Tag(call_site(1)), v0, v)


def _nbr(ctx: RoundContext, tag: Tag, v0: Any, v: Any) -> Any:
    key = _claim(ctx, tag)
    values = ctx.neighbour_values(key)
    values[ctx.device] = ctx.previous(key, v0)
    field = NbrField(ctx.device, values, v0)
    if v is _MISSING:
        v = v0
    if callable(v):
        with ctx.cursor.frame(tag):
            result = v(field)
        _store(ctx, key, result)
        return result
    _store(ctx, key, v)
    return field


def nbr_uid(ctx: RoundContext) -> NbrField:
    """
    Field mapping every aligned neighbour (and self) to its own id.
    """
    key = _claim(ctx, Tag(call_site(1)))
    values = {device: device for device in ctx.neighbour_values(key)}
    values[ctx.device] = ctx.device
    _store(ctx, key, ctx.device)
    return NbrField(ctx.device, values, None)


def nbr_dist(ctx: RoundContext) -> NbrField:
    """Sensor field of metric distances to neighbours in range."""
    return ctx.sensors.nbr_distances


def self_of(ctx: RoundContext, phi: NbrField) -> Any:
    return phi.self_value


def mod_self(ctx: RoundContext, phi: NbrField, v: Any) -> NbrField:
    return phi.with_self(v)


def fold_hood(ctx: RoundContext, f: Callable[[Any, Any], Any], phi: NbrField, v: Any = _MISSING) -> Any:
    """
    Fold a field with a commutative and associative function.

    Args:
        ctx: Round context
        f: Binary function
        phi: Field to fold
        v: If given, used instead of the self entry

    Returns:
        The folded value
    """
    if v is not _MISSING:
        phi = phi.with_self(v)
    return functools.reduce(f, (value for _, value in phi.items()))


def map_hood(ctx: RoundContext, f: Callable[..., Any], *args: Any) -> NbrField:
    """
    Apply f point-wise over fields; local arguments are broadcast.

    The result's domain is the union of the field arguments' domains; ids
    missing from one field use that field's default.

    Args:
        ctx: Round context
        f: Function of as many arguments as passed
        *args: Fields or local values

    Returns:
        NbrField of results
    """
    fields = [a for a in args if is_field(a)]
    if not fields:
        value = f(*args)
        return NbrField(ctx.device, {ctx.device: value}, value)
    ids = set()
    for phi in fields:
        ids.update(phi.values)
    values = {
        device: f(*(a.get(device) if is_field(a) else a for a in args))
        for device in ids
    }
    default = f(*(a.default if is_field(a) else a for a in args))
    return NbrField(ctx.device, values, default)


def mux(ctx: RoundContext, c: Any, t: Any, f: Any) -> Any:
    """
    Select between two already evaluated values.

    A field condition selects point-wise.
    """
    if not is_field(c):
        return t if c else f
    ids = set(c.values)
    for branch in (t, f):
        if is_field(branch):
            ids.update(branch.values)

    def pick(condition: Any, device: Optional[DeviceId]) -> Any:
        chosen = t if condition else f
        if not is_field(chosen):
            return chosen
        return chosen.default if device is None else chosen.get(device)

    values = {device: pick(c.get(device), device) for device in ids}
    return NbrField(ctx.device, values, pick(c.default, None))


def aligned_branch(ctx: RoundContext, c: bool, then: Callable[[], Any], otherwise: Callable[[], Any]) -> Any:
    """
    Conditional branching: evaluate only the selected branch.

    Builtins inside the branch carry the branch bit in their trace keys, so
    devices taking different branches do not exchange values.

    Args:
        ctx: Round context
        c: Guard
        then: Thunk evaluated when c is true
        otherwise: Thunk evaluated when c is false

    Returns:
        The value of the evaluated branch
    """
    branch = bool(c)
    with ctx.cursor.frame(Tag(call_site(1), branch=branch)):
        return then() if branch else otherwise()


def _ranked(phi: NbrField, v: Any):
    if v is not _MISSING:
        phi = phi.with_self(v)
    return min(phi.values.items(), key=lambda item: (item[1], item[0]))


def min_hood(ctx: RoundContext, phi: NbrField, v: Any = _MISSING) -> Any:
    """
    Minimum value of a field, ties broken by device id.

    Args:
        ctx: Round context
        phi: Field
        v: If given, used instead of the self entry

    Returns:
        The minimum value
    """
    return _ranked(phi, v)[1]


def argmin_hood(ctx: RoundContext, phi: NbrField, v: Any = _MISSING) -> DeviceId:
    """Id of the device holding the minimum value, ties broken by id."""
    return _ranked(phi, v)[0]
