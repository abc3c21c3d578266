"""
Trace alignment for aggregate programs.

Every builtin evaluation is identified by the path of call-site tags leading
to it. Two evaluations on different devices exchange state only when their
paths are equal, so values from distinct call sites, branches or process
instances never mix.
"""

import hashlib
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

from calculus.codec import encode_value


class TraceCollisionError(RuntimeError):
    """Raised when two builtin evaluations in one round produce the same trace key."""


class Tag(NamedTuple):
    """One step of a trace path."""
    site: str
    index: Optional[int] = None
    branch: Optional[bool] = None
    process: Optional[int] = None

    def encode(self) -> bytes:
        return encode_value(tuple(self))

    def __str__(self) -> str:
        parts = [self.site]
        if self.index is not None:
            parts.append(f"#{self.index}")
        if self.branch is not None:
            parts.append("?then" if self.branch else "?else")
        if self.process is not None:
            parts.append(f"@{self.process:08x}")
        return "".join(parts)


ROOT_DIGEST = hashlib.blake2b(b"aggregate-root", digest_size=16).digest()


@lru_cache(maxsize=65536)
def _chain(parent: bytes, tag: Tag) -> bytes:
    return hashlib.blake2b(parent + tag.encode(), digest_size=16).digest()


@dataclass(frozen=True)
class TraceKey:
    """
    A trace path together with its chained digest.

    The 32-bit `key` (first four digest bytes) is what travels on the wire.
    """
    path: Tuple[Tag, ...] = ()
    digest: bytes = ROOT_DIGEST

    def child(self, tag: Tag) -> "TraceKey":
        return TraceKey(self.path + (tag,), _chain(self.digest, tag))

    @property
    def key(self) -> int:
        return int.from_bytes(self.digest[:4], "little")

    def __str__(self) -> str:
        return "/".join(str(tag) for tag in self.path) or "<root>"


def digest32(data: bytes) -> int:
    """Stable 32-bit digest of arbitrary bytes."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=4).digest(), "little")


_SITE_CACHE: Dict[Tuple[object, int], str] = {}


def call_site(depth: int = 1) -> str:
    """
    Static identifier of the call expression `depth` frames above the caller.

    The identifier combines module, function, the function's first line and
    the bytecode offset of the call, so it is the same on every device and
    every round for the same source location.

    Args:
        depth: 1 for the immediate caller of the function invoking call_site

    Returns:
        Site string
    """
    frame = sys._getframe(depth + 1)
    code = frame.f_code
    lookup = (code, frame.f_lasti)
    site = _SITE_CACHE.get(lookup)
    if site is None:
        module = frame.f_globals.get("__name__", "?")
        site = f"{module}:{code.co_name}:{code.co_firstlineno}:{frame.f_lasti}"
        _SITE_CACHE[lookup] = site
    return site


class Trace:
    """
    Cursor over trace paths plus the write log of one round.

    Frames are pushed for aggregate function calls, loop iterations, branches
    and process instances. Builtins write their values at the key of their own
    tag under the current frame. Writes can be captured by nested sinks so a
    process evaluation may be discarded as a whole.
    """

    def __init__(self):
        self._stack: List[TraceKey] = [TraceKey()]
        self._sinks: List[Dict[int, bytes]] = [{}]
        self._seen: Dict[int, TraceKey] = {}

    @property
    def current(self) -> TraceKey:
        return self._stack[-1]

    @property
    def depth(self) -> int:
        return len(self._stack) - 1

    @contextmanager
    def frame(self, tag: Tag) -> Iterator[TraceKey]:
        """
        Evaluate the enclosed block under a child frame.

        Args:
            tag: Tag appended to the current path

        Yields:
            The child TraceKey
        """
        child = self.current.child(tag)
        self._stack.append(child)
        try:
            yield child
        finally:
            self._stack.pop()

    def key_for(self, tag: Tag) -> TraceKey:
        """Trace key of a builtin with the given tag under the current frame."""
        return self.current.child(tag)

    def claim(self, trace_key: TraceKey) -> int:
        """
        Reserve the wire key of a builtin evaluation for this round.

        Args:
            trace_key: Full trace key of the evaluation

        Returns:
            32-bit wire key

        Raises:
            TraceCollisionError: if the key was already used this round
        """
        key = trace_key.key
        previous = self._seen.get(key)
        if previous is not None:
            raise TraceCollisionError(
                f"Trace key {key:08x} produced twice in one round: {previous} and {trace_key}. "
                f"Repeated calls need ctx.iteration(i) or an @aggregate function."
            )
        self._seen[key] = trace_key
        return key

    def write(self, key: int, payload: bytes) -> None:
        self._sinks[-1][key] = payload

    @contextmanager
    def capture(self) -> Iterator[Dict[int, bytes]]:
        """
        Collect writes of the enclosed block in a separate sink.

        The caller decides whether to keep them with `commit`.
        """
        sink: Dict[int, bytes] = {}
        self._sinks.append(sink)
        try:
            yield sink
        finally:
            self._sinks.pop()

    def commit(self, entries: Dict[int, bytes]) -> None:
        self._sinks[-1].update(entries)

    @property
    def entries(self) -> Dict[int, bytes]:
        return self._sinks[0]
