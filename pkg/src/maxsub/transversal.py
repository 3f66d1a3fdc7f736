"""Hitting-set machinery over finite set families.

``J(M)`` is the set of all H ⊆ ∪M that meet every member of M and in which
each element is the only element of H in some member. ``construct_h`` runs the
sequential procedure that builds such an H from an ordered enumeration of M.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Hashable, Iterable, Sequence

log = logging.getLogger(__name__)

MAX_UNIVERSE = 20


class UniverseTooLarge(ValueError):
    pass


class NoResult(RuntimeError):
    pass


@dataclass(frozen=True)
class SetFamily:
    members: tuple[frozenset, ...]

    def __post_init__(self):
        if any(not m for m in self.members):
            raise ValueError("family members must be non-empty")

    @classmethod
    def of(cls, members: Iterable[Iterable[Hashable]]) -> SetFamily:
        return cls(tuple(frozenset(m) for m in members))

    @cached_property
    def universe(self) -> frozenset:
        return frozenset().union(*self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_text(self) -> str:
        return "\n".join(" ".join(str(x) for x in sorted(m)) for m in self.members)

    @classmethod
    def from_text(cls, text: str) -> SetFamily:
        members = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                members.append(int(tok) for tok in line.split())
        return cls.of(members)


def is_in_j(H: Iterable, M: SetFamily) -> bool:
    H = frozenset(H)
    if not H <= M.universe:
        return False
    if any(not (H & m) for m in M):
        return False
    return all(any(H & m == {h} for m in M) for h in H)


def _sort_key(H: frozenset):
    return (len(H), sorted(H))


def _forced(M: SetFamily) -> tuple[frozenset, list[frozenset]]:
    """Elements forced into every member of J(M) by singleton members, and
    the members not yet hit by them."""
    forced = frozenset(x for m in M for x in m if len(m) == 1)
    return forced, [m for m in M if not (m & forced)]


def enumerate_j(M: SetFamily, max_universe: int = MAX_UNIVERSE) -> list[frozenset]:
    """All members of J(M) by subset enumeration, sorted by (size, elements).

    Elements of singleton members belong to every member of J(M), so the
    search runs over the residual universe only; the size guard applies there.
    """
    forced, rest = _forced(M)
    residual = sorted(frozenset().union(*rest) - forced, key=repr) if rest else []
    if len(residual) > max_universe:
        raise UniverseTooLarge(f"residual universe has {len(residual)} elements (limit {max_universe})")
    # bitmask search: residual points get the low bits, forced points the high ones
    points = residual + sorted(forced, key=repr)
    bit = {x: 1 << i for i, x in enumerate(points)}
    masks = [sum(bit.get(x, 0) for x in m) for m in M]  # points outside never join J(M)
    base = sum(bit[x] for x in forced)
    out = []
    for r in range(len(residual) + 1):
        for extra in combinations(range(len(residual)), r):
            H = base | sum(1 << i for i in extra)
            hits = [H & m for m in masks]
            if not all(hits):
                continue
            unique = 0
            for h in hits:
                if h & (h - 1) == 0:
                    unique |= h
            if unique == H:
                out.append(frozenset(x for x in points if H & bit[x]))
    return sorted(out, key=_sort_key)


def minimal_hitting_sets(M: SetFamily, max_universe: int = MAX_UNIVERSE) -> list[frozenset]:
    """Inclusion-minimal hitting sets by plain brute force over ∪M."""
    U = sorted(M.universe, key=repr)
    if len(U) > max_universe:
        raise UniverseTooLarge(f"universe has {len(U)} elements (limit {max_universe})")
    hitting = [frozenset(c) for r in range(len(U) + 1) for c in combinations(U, r)
               if all(set(c) & m for m in M)]
    hs = set(hitting)
    minimal = [H for H in hitting if not any(H - {x} in hs for x in H)]
    return sorted(minimal, key=_sort_key)


def filter_h(M: SetFamily, avoid: Iterable, max_universe: int = MAX_UNIVERSE) -> list[frozenset]:
    """Members of J(M) disjoint from ``avoid``."""
    avoid = frozenset(avoid)
    return [H for H in enumerate_j(M, max_universe) if not (H & avoid)]


def construct_h(M: SetFamily | Sequence[Iterable], tie_break: str = "smallest") -> frozenset:
    """Run the sequential construction over the members in order.

    Member i is skipped when it already meets H, or when some later member
    minus the discarded elements fits inside it; otherwise an element outside
    the discarded set is added and the rest of the member is discarded.
    Add-step choices are backtracked if a step finds nothing to add or the
    result fails the J(M) check.
    """
    if tie_break != "smallest":
        raise ValueError("only the 'smallest' tie-break is supported")
    if not isinstance(M, SetFamily):
        M = SetFamily.of(M)
    A = M.members
    n = len(A)

    def run(i: int, H: frozenset, Hbar: frozenset):
        if i == n:
            if is_in_j(H, M):
                return H
            return None
        Ai = A[i]
        if Ai & H or any(A[j] - Hbar <= Ai for j in range(i + 1, n)):
            return run(i + 1, H, Hbar)
        choices = sorted(Ai - Hbar, key=lambda x: (repr(type(x)), x))
        for a in choices:
            res = run(i + 1, H | {a}, (Hbar | Ai) - {a})
            if res is not None:
                return res
        return None

    result = run(0, frozenset(), frozenset())
    if result is None:
        log.warning("construct_h: no result for family %s", [sorted(m) for m in A])
        raise NoResult(f"sequential construction stalls on {[sorted(m) for m in A]}")
    return result


def exhaustive_corpus(max_universe: int = 6, max_members: int = 4, cap: int = 5000) -> list[SetFamily]:
    """Families of non-empty subsets of {0..u-1} covering it, one per
    isomorphism class (relabelling points and reordering members).

    A family with k members on u points is the multiset of the u membership
    patterns (non-zero k-bit vectors) of its points, so point relabelling is
    already factored out; member reordering permutes the bits.
    """
    from itertools import combinations_with_replacement, permutations

    out: list[SetFamily] = []
    for k in range(1, max_members + 1):
        perms = list(permutations(range(k)))
        full = (1 << k) - 1

        # table[p][v]: pattern v with its member bits permuted by p
        table = [[sum(1 << p[b] for b in range(k) if v >> b & 1) for v in range(full + 1)] for p in perms[1:]]

        for u in range(1, max_universe + 1):
            for types in combinations_with_replacement(range(1, full + 1), u):
                cover = 0
                for v in types:
                    cover |= v
                if cover != full:
                    continue
                if any(tuple(sorted(t[v] for v in types)) < types for t in table):
                    continue
                out.append(SetFamily.of(
                    [{x for x, v in enumerate(types) if v >> b & 1} for b in range(k)]))
                if len(out) >= cap:
                    return out
    return out
