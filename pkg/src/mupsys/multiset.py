"""Finite multisets of symbol objects.

A multiset is an immutable map ``symbol -> positive count``.  Absent symbols
have count zero.  Keys are kept in sorted order so equality, hashing and
serialization are canonical.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping

MAX_COUNT = 2**63 - 1


class NotSubMultiset(ValueError):
    """Raised by :func:`subtract` when the subtrahend is not contained."""


def check_symbol(name: str) -> str:
    if not isinstance(name, str) or not name or any(c.isspace() for c in name):
        raise ValueError(f"invalid symbol {name!r}")
    return name


class Multiset(Mapping):
    __slots__ = ("_d", "_hash", "_size")

    def __init__(self, entries: Mapping[str, int] | Iterable[str] | None = None):
        d: dict[str, int] = {}
        if entries is None:
            pass
        elif isinstance(entries, Mapping):
            for sym, n in entries.items():
                if not isinstance(n, int) or n < 0:
                    raise ValueError(f"bad count {n!r} for {sym!r}")
                if n:
                    d[sym] = n
        else:
            for sym in entries:
                d[sym] = d.get(sym, 0) + 1
        for n in d.values():
            if n > MAX_COUNT:
                raise OverflowError("multiset count exceeds 64-bit range")
        self._d = dict(sorted(d.items()))
        self._hash = None
        self._size = sum(self._d.values())

    @classmethod
    def _trusted(cls, d: dict[str, int]) -> Multiset:
        # d must already be free of zero counts
        ms = cls.__new__(cls)
        ms._d = dict(sorted(d.items()))
        ms._hash = None
        ms._size = sum(ms._d.values())
        if ms._d and max(ms._d.values()) > MAX_COUNT:
            raise OverflowError("multiset count exceeds 64-bit range")
        return ms

    def __getitem__(self, sym: str) -> int:
        return self._d.get(sym, 0)

    def __contains__(self, sym: object) -> bool:
        return sym in self._d

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        """Number of distinct symbols (use :attr:`cardinality` for the size)."""
        return len(self._d)

    def __bool__(self) -> bool:
        return bool(self._d)

    # dict views are much faster than the Mapping mixins
    def items(self):
        return self._d.items()

    def keys(self):
        return self._d.keys()

    def values(self):
        return self._d.values()

    def get(self, sym: str, default=None):
        return self._d.get(sym, default)

    @property
    def cardinality(self) -> int:
        return self._size

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Multiset):
            return self._d == other._d
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._d.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{s}:{n}" for s, n in self._d.items())
        return "{" + inner + "}"

    def __add__(self, other: Multiset) -> Multiset:
        return union(self, other)

    def __sub__(self, other: Multiset) -> Multiset:
        return subtract(self, other)

    def __le__(self, other: Multiset) -> bool:
        return contains(other, self)

    def elements(self) -> Iterator[str]:
        for sym, n in self._d.items():
            for _ in range(n):
                yield sym

    def to_json(self) -> dict[str, int]:
        return dict(self._d)

    @classmethod
    def from_json(cls, obj: Mapping[str, int]) -> Multiset:
        for sym in obj:
            check_symbol(sym)
        return cls(obj)


EMPTY = Multiset()


def union(a: Multiset, b: Multiset) -> Multiset:
    if not b:
        return a
    if not a:
        return b
    d = dict(a._d)
    for sym, n in b._d.items():
        d[sym] = d.get(sym, 0) + n
    return Multiset._trusted(d)


def subtract(a: Multiset, b: Multiset) -> Multiset:
    if not b:
        return a
    d = dict(a._d)
    for sym, n in b._d.items():
        left = d.get(sym, 0) - n
        if left < 0:
            raise NotSubMultiset(f"{b!r} is not contained in {a!r}")
        if left:
            d[sym] = left
        else:
            del d[sym]
    return Multiset._trusted(d)


def contains(a: Multiset, b: Multiset) -> bool:
    """True iff every symbol occurs in ``a`` at least as often as in ``b``."""
    ad = a._d
    return all(ad.get(sym, 0) >= n for sym, n in b._d.items())
