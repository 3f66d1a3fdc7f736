"""Eventually periodic subsets of N.

An :class:`EPSet` is a finite patch below a threshold ``N`` followed by a union
of residue classes modulo ``m``. Every instance is kept in canonical form
(minimal period, minimal threshold) so that equality is structural.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator

from .extnat import INF, ExtNat, Fin


class IndexBeyondCardinality(IndexError):
    pass


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Solve x ≡ r1 (mod m1), x ≡ r2 (mod m2). Returns (r, lcm) or None."""
    g = gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    l = m1 // g * m2
    # m1*t ≡ r2 - r1 (mod m2)
    t = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g) if m2 // g > 1 else 0
    return (r1 + m1 * t) % l, l


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@dataclass(frozen=True)
class EPSet:
    N: int
    m: int
    R: frozenset[int]
    F: frozenset[int]

    def __post_init__(self):
        if self.N < 0 or self.m < 1:
            raise ValueError("EPSet needs N >= 0 and m >= 1")
        if any(not 0 <= r < self.m for r in self.R):
            raise ValueError("residues must lie in [0, m)")
        if any(not 0 <= f < self.N for f in self.F):
            raise ValueError("patch elements must lie in [0, N)")

    # construction -----------------------------------------------------

    @classmethod
    def make(cls, N: int, m: int, R: Iterable[int], F: Iterable[int] = ()) -> EPSet:
        return canonical(N, m, frozenset(r % m for r in R), frozenset(F))

    @classmethod
    def empty(cls) -> EPSet:
        return cls(0, 1, frozenset(), frozenset())

    @classmethod
    def naturals(cls) -> EPSet:
        return cls(0, 1, frozenset({0}), frozenset())

    @classmethod
    def finite(cls, members: Iterable[int]) -> EPSet:
        members = frozenset(members)
        if any(x < 0 for x in members):
            raise ValueError("EPSet members must be nonnegative")
        N = max(members) + 1 if members else 0
        return canonical(N, 1, frozenset(), members)

    @classmethod
    def progression(cls, start: int, step: int) -> EPSet:
        """{start, start+step, start+2*step, ...}"""
        if start < 0 or step < 1:
            raise ValueError("progression needs start >= 0 and step >= 1")
        return canonical(start, step, frozenset({start % step}), frozenset())

    @classmethod
    def residue(cls, r: int, m: int) -> EPSet:
        return canonical(0, m, frozenset({r % m}), frozenset())

    # queries ----------------------------------------------------------

    def __contains__(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.N:
            return n in self.F
        return n % self.m in self.R

    def card(self) -> ExtNat:
        return INF if self.R else Fin(len(self.F))

    @property
    def is_finite(self) -> bool:
        return not self.R

    def is_empty(self) -> bool:
        return not self.R and not self.F

    def _tail_block(self) -> list[int]:
        return sorted(n for n in range(self.N, self.N + self.m) if n % self.m in self.R)

    def kth(self, k: int) -> int:
        """The k-th smallest member (0-based)."""
        if k < 0:
            raise IndexBeyondCardinality(k)
        patch = sorted(self.F)
        if k < len(patch):
            return patch[k]
        k -= len(patch)
        if not self.R:
            raise IndexBeyondCardinality(f"index {k + len(patch)} beyond finite cardinality {len(patch)}")
        block = self._tail_block()
        q, i = divmod(k, len(block))
        return block[i] + q * self.m

    def rank(self, n: int) -> int:
        """Number of members strictly below n."""
        if n <= 0:
            return 0
        if n <= self.N:
            return sum(1 for f in self.F if f < n)
        count = len(self.F)
        q, rem = divmod(n - self.N, self.m)
        count += q * len(self.R)
        block = self._tail_block()
        count += bisect.bisect_left(block, self.N + rem)
        return count

    def min(self) -> int | None:
        if self.F:
            return min(self.F)
        if self.R:
            return self.kth(0)
        return None

    def members(self, limit: int | None = None) -> Iterator[int]:
        """Members in increasing order; stops below ``limit`` when given."""
        k = 0
        total = None if self.R else len(self.F)
        while total is None or k < total:
            x = self.kth(k)
            if limit is not None and x >= limit:
                return
            yield x
            k += 1

    # algebra ----------------------------------------------------------

    def union(self, other: EPSet) -> EPSet:
        return eps_combine("union", self, other)

    def intersect(self, other: EPSet) -> EPSet:
        return eps_combine("intersect", self, other)

    def difference(self, other: EPSet) -> EPSet:
        return eps_combine("difference", self, other)

    def complement(self) -> EPSet:
        return eps_combine("difference", EPSet.naturals(), self)

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    # serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {"N": self.N, "m": self.m, "R": sorted(self.R), "F": sorted(self.F)}

    @classmethod
    def from_json(cls, obj: dict | str) -> EPSet:
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.make(int(obj["N"]), int(obj["m"]), obj.get("R", ()), obj.get("F", ()))

    def __str__(self):
        head = ",".join(map(str, sorted(self.F)))
        if not self.R:
            return "{" + head + "}"
        tail = ",".join(map(str, sorted(self.R)))
        return f"{{{head}}} ∪ {{n ≥ {self.N} : n mod {self.m} ∈ {{{tail}}}}}"


def canonical(N: int, m: int, R: frozenset[int], F: frozenset[int]) -> EPSet:
    # minimal period of the residue pattern
    for d in _divisors(m):
        if all(((r + d) % m in R) for r in R):
            R = frozenset(r % d for r in R)
            m = d
            break
    F = set(F)
    while N > 0:
        x = N - 1
        if (x in F) != (x % m in R):
            break
        F.discard(x)
        N -= 1
    return EPSet(N, m, frozenset(R), frozenset(F))


def _lift(R: frozenset[int], m: int, M: int) -> set[int]:
    return {r + m * i for r in R for i in range(M // m)}


def eps_combine(kind: str, s: EPSet, t: EPSet) -> EPSet:
    M = lcm(s.m, t.m)
    N = max(s.N, t.N)
    if kind == "intersect":
        R = set()
        for r1 in s.R:
            for r2 in t.R:
                sol = crt_pair(r1, s.m, r2, t.m)
                if sol is not None:
                    R.add(sol[0])
        op = lambda a, b: a and b
    elif kind == "union":
        R = _lift(s.R, s.m, M) | _lift(t.R, t.m, M)
        op = lambda a, b: a or b
    elif kind == "difference":
        R = _lift(s.R, s.m, M) - _lift(t.R, t.m, M)
        op = lambda a, b: a and not b
    else:
        raise ValueError(f"unknown combine kind {kind!r}")
    F = frozenset(n for n in range(N) if op(n in s, n in t))
    return canonical(N, M, frozenset(R), F)


def eps_card(s: EPSet) -> ExtNat:
    return s.card()


def eps_kth(s: EPSet, k: int) -> int:
    return s.kth(k)
