"""Finite full transformation monoids T_n (n <= 4) as a ground-truth lab.

Maps are tuples of images of 0..n-1 and compose left to right (apply the
first, then the second). Elements are identified by their lexicographic index
among all n**n maps, and closures run on a precomputed multiplication table.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Iterable

import numpy as np

from .transversal import SetFamily, construct_h, filter_h, NoResult

MAX_N = 4
MAX_CAP = {1: 4, 2: 3, 3: 2, 4: 1}


class HypothesisViolation(ValueError):
    def __init__(self, which: str, witness=None):
        super().__init__(f"hypothesis violated: {which}" + (f" (witness {witness})" if witness is not None else ""))
        self.which = which
        self.witness = witness


class CapTooLarge(ValueError):
    pass


@dataclass(frozen=True, order=True)
class FinMap:
    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if n < 1 or any(not 0 <= v < n for v in self.images):
            raise ValueError(f"not a total map on {n} points: {list(self.images)}")

    @classmethod
    def of(cls, images: Iterable[int]) -> FinMap:
        return cls(tuple(int(v) for v in images))

    @classmethod
    def parse(cls, text: str) -> FinMap:
        return cls.of(json.loads(text))

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def id(self) -> int:
        out = 0
        for v in self.images:
            out = out * self.n + v
        return out

    @classmethod
    def from_id(cls, i: int, n: int) -> FinMap:
        digits = []
        for _ in range(n):
            i, v = divmod(i, n)
            digits.append(v)
        return cls(tuple(reversed(digits)))

    @property
    def rank(self) -> int:
        return len(set(self.images))

    def then(self, other: FinMap) -> FinMap:
        return FinMap(tuple(other.images[v] for v in self.images))

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __str__(self):
        return str(list(self.images))


def _check_n(n: int):
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}, got {n}")


@lru_cache(maxsize=None)
def all_maps(n: int) -> tuple[FinMap, ...]:
    _check_n(n)
    return tuple(FinMap(p) for p in product(range(n), repeat=n))


@lru_cache(maxsize=None)
def table(n: int) -> np.ndarray:
    """table[a, b] = id of (a then b)."""
    maps = np.array([m.images for m in all_maps(n)], dtype=np.int64)      # K × n
    weights = n ** np.arange(n - 1, -1, -1)
    # composed[a, x, b] = maps[b, maps[a, x]]
    composed = maps[np.arange(len(maps))[None, None, :], maps[:, :, None]]
    return np.einsum("axb,x->ab", composed, weights)


def symmetric_group(n: int) -> frozenset[FinMap]:
    return frozenset(FinMap(p) for p in permutations(range(n)))


def constants(n: int) -> frozenset[FinMap]:
    return frozenset(FinMap((c,) * n) for c in range(n))


def of_rank(n: int, r: int) -> frozenset[FinMap]:
    return frozenset(m for m in all_maps(n) if m.rank == r)


def _ids(maps: Iterable[FinMap]) -> np.ndarray:
    return np.array(sorted({m.id for m in maps}), dtype=np.int64)


def _closure_mask(gen_ids: np.ndarray, n: int) -> np.ndarray:
    T = table(n)
    mask = np.zeros(len(T), dtype=bool)
    mask[gen_ids] = True
    frontier = gen_ids
    while len(frontier):
        prods = np.unique(T[np.ix_(frontier, gen_ids)])
        frontier = prods[~mask[prods]]
        mask[frontier] = True
    return mask


def closure(gens: Iterable[FinMap], n: int) -> frozenset[FinMap]:
    """Least composition-closed set containing ``gens`` (no identity unless generated)."""
    gens = list(gens)
    if any(g.n != n for g in gens):
        raise ValueError("all generators must act on n points")
    if not gens:
        return frozenset()
    mask = _closure_mask(_ids(gens), n)
    maps = all_maps(n)
    return frozenset(maps[i] for i in np.flatnonzero(mask))


def is_closed(S: Iterable[FinMap], n: int) -> bool:
    ids = _ids(S)
    if not len(ids):
        return True
    mask = np.zeros(n ** n, dtype=bool)
    mask[ids] = True
    return bool(mask[table(n)[np.ix_(ids, ids)]].all())


@dataclass
class SubsemigroupReport:
    elements: frozenset[int]
    closed: bool
    proper: bool
    maximal: bool
    regenerated: dict[int, int] = field(default_factory=dict)   # outsider id -> |⟨S ∪ {x}⟩|


def is_maximal(S: Iterable[FinMap], n: int) -> SubsemigroupReport:
    S = frozenset(S)
    ids = _ids(S)
    K = n ** n
    closed = is_closed(S, n)
    proper = len(ids) < K
    regenerated = {}
    if closed and proper:
        inside = set(ids.tolist())
        for x in range(K):
            if x not in inside:
                regenerated[x] = int(_closure_mask(np.append(ids, x), n).sum())
    maximal = closed and proper and all(v == K for v in regenerated.values())
    return SubsemigroupReport(frozenset(ids.tolist()), closed, proper, maximal, regenerated)


def gen_family(U: Iterable[FinMap], n: int, cap: int) -> SetFamily:
    """All A ⊆ T_n with |A| <= cap whose closure meets U, as sets of ids,
    ordered by size and then lexicographically by id."""
    _check_n(n)
    if cap > MAX_CAP[n]:
        raise CapTooLarge(f"cap {cap} exceeds the limit {MAX_CAP[n]} for n={n}")
    target = np.zeros(n ** n, dtype=bool)
    target[_ids(U)] = True
    members = []
    for size in range(1, cap + 1):
        for A in combinations(range(n ** n), size):
            if (target & _closure_mask(np.array(A, dtype=np.int64), n)).any():
                members.append(frozenset(A))
    return SetFamily(tuple(members))


@dataclass
class CandidateOutcome:
    H: frozenset[int]
    complement_size: int
    closed: bool
    maximal: bool
    contains_constants: bool
    converse: dict[int, int]

    def to_json(self) -> dict:
        return {"H_size": len(self.H), "H": sorted(self.H), "complement_size": self.complement_size,
                "closed": self.closed, "maximal": self.maximal,
                "contains_constants": self.contains_constants,
                "converse_closure_sizes": sorted(set(self.converse.values())),
                "converse_checks": len(self.converse)}


@dataclass
class PipelineReport:
    n: int
    cap: int
    order: int
    W_size: int
    U_size: int
    family_size: int
    exact: bool
    candidates: list[CandidateOutcome]
    construct_h: frozenset[int] | None

    def to_json(self) -> dict:
        return {"n": self.n, "cap": self.cap, "order": self.order, "W_size": self.W_size,
                "U_size": self.U_size, "family_size": self.family_size,
                "mode": "exact" if self.exact else "experimental",
                "construct_h_size": None if self.construct_h is None else len(self.construct_h),
                "candidates": [c.to_json() for c in self.candidates]}

    def to_text(self) -> str:
        lines = [f"maximality pipeline on T_{self.n}: |T_{self.n}| = {self.order}, |W| = {self.W_size}, "
                 f"|U| = {self.U_size}, cap = {self.cap}",
                 f"Gen(U) truncated family: {self.family_size} members "
                 f"({'exact: singleton-forced' if self.exact else 'experimental: cap-truncated'})",
                 f"candidates H: {len(self.candidates)}"]
        for c in self.candidates:
            sizes = sorted(set(c.converse.values()))
            lines.append(f"  H size {len(c.H)}, complement size {c.complement_size}, closed={str(c.closed).lower()}, "
                         f"maximal={str(c.maximal).lower()}, contains constants={str(c.contains_constants).lower()}, "
                         f"converse checks {len(c.converse)} reaching {sizes}")
        if self.construct_h is not None:
            lines.append(f"construct_h witness size {len(self.construct_h)}")
        return "\n".join(lines)


def maximality_pipeline(W: Iterable[FinMap], U: Iterable[FinMap], n: int, cap: int) -> PipelineReport:
    W, U = frozenset(W), frozenset(U)
    K = n ** n
    if not is_closed(W, n):
        raise HypothesisViolation("W is not a subsemigroup")
    if W & U:
        raise HypothesisViolation("U meets W", min(W & U))
    w_ids = _ids(W)
    for u in sorted(U):
        if _closure_mask(np.append(w_ids, u.id), n).sum() != K:
            raise HypothesisViolation("<W, u> != T_n", u)
    M = gen_family(U, n, cap)
    forced = frozenset(next(iter(m)) for m in M if len(m) == 1)
    rest = np.array(sorted(set(range(K)) - forced), dtype=np.int64)
    u_mask = np.zeros(K, dtype=bool)
    u_mask[_ids(U)] = True
    exact = not len(rest) or not (u_mask & _closure_mask(rest, n)).any()
    candidates = []
    constant_ids = {c.id for c in constants(n)}
    maps = all_maps(n)
    for H in filter_h(M, [w.id for w in W]):
        comp = [maps[i] for i in range(K) if i not in H]
        rep = is_maximal(comp, n)
        candidates.append(CandidateOutcome(H, len(comp), rep.closed, rep.maximal,
                                           constant_ids <= rep.elements, rep.regenerated))
    try:
        witness = construct_h(M) if len(M) else None
    except NoResult:
        witness = None
    return PipelineReport(n, cap, K, len(W), len(U), len(M), exact, candidates, witness)


PRESETS = {
    "sym3": lambda: (symmetric_group(3), of_rank(3, 2), 3, 1),
    "sym4": lambda: (symmetric_group(4), of_rank(4, 3), 4, 1),
}


def run_preset(name: str) -> PipelineReport:
    try:
        W, U, n, cap = PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return maximality_pipeline(W, U, n, cap)
