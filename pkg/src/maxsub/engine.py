"""Invariant engine, classification, fiber enumeration and window evidence.

Invariants of a term are reported either exactly or as certified bounds.
Rca leaves (and all-Rca composites) are exact; ColProj and ColEmbed have
known invariants; Lazy terms carry construction-asserted values; general
composites are bounded by sound composition rules.
"""
from __future__ import annotations

import heapq
import itertools
import threading
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Iterator

from .epset import EPSet
from .extnat import INF, ZERO, ExtNat, Fin
from .pairing import column, pair, triangular_root, unpair
from .rca import RcaMap, fiber as rca_fiber, identity, rca_invariants
from .terms import ColEmbed, ColProj, Compose, Lazy, Rca, Term, evaluator, flatten, instance


class Tri(Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"

    @classmethod
    def of(cls, b: bool) -> Tri:
        return cls.YES if b else cls.NO

    def __and__(self, other: Tri) -> Tri:
        if Tri.NO in (self, other):
            return Tri.NO
        if Tri.UNKNOWN in (self, other):
            return Tri.UNKNOWN
        return Tri.YES

    def __or__(self, other: Tri) -> Tri:
        if Tri.YES in (self, other):
            return Tri.YES
        if Tri.UNKNOWN in (self, other):
            return Tri.UNKNOWN
        return Tri.NO

    def __invert__(self) -> Tri:
        return {Tri.YES: Tri.NO, Tri.NO: Tri.YES, Tri.UNKNOWN: Tri.UNKNOWN}[self]

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Bounds:
    lo: ExtNat
    hi: ExtNat

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"empty bounds [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, v: ExtNat | int) -> Bounds:
        v = v if isinstance(v, ExtNat) else Fin(v)
        return cls(v, v)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> ExtNat:
        if not self.is_exact:
            raise ValueError("bounds are not exact")
        return self.lo

    def __add__(self, other: Bounds) -> Bounds:
        return Bounds(self.lo + other.lo, self.hi + other.hi)

    def meet(self, lo: ExtNat | None = None, hi: ExtNat | None = None) -> Bounds:
        new_lo = max(self.lo, lo) if lo is not None else self.lo
        new_hi = min(self.hi, hi) if hi is not None else self.hi
        return Bounds(new_lo, new_hi)

    def __and__(self, other: Bounds) -> Bounds:
        return self.meet(other.lo, other.hi)

    def is_zero(self) -> Tri:
        if self.hi == ZERO:
            return Tri.YES
        return Tri.NO if self.lo > ZERO else Tri.UNKNOWN

    def is_inf(self) -> Tri:
        if self.lo.is_inf:
            return Tri.YES
        return Tri.NO if self.hi.is_fin else Tri.UNKNOWN

    def __str__(self):
        return str(self.lo) if self.is_exact else f"[{self.lo}, {self.hi}]"

    def to_json(self):
        if self.is_exact:
            return {"exact": self.lo.to_json()}
        return {"lo": self.lo.to_json(), "hi": self.hi.to_json()}


UNBOUNDED = Bounds(ZERO, INF)


@dataclass(frozen=True)
class InvariantReport:
    d: Bounds = UNBOUNDED
    c: Bounds = UNBOUNDED
    k: Bounds = UNBOUNDED
    rank: Bounds = Bounds(Fin(1), INF)
    image: EPSet | None = None
    # every point of the image has an infinite preimage
    all_fibers_infinite: Tri = Tri.UNKNOWN
    source: str = "rules"

    @property
    def has_infinite_kernel_class(self) -> Tri:
        return ~self.k.is_zero()

    def to_json(self) -> dict:
        return {
            "d": self.d.to_json(), "c": self.c.to_json(), "k": self.k.to_json(),
            "rank": self.rank.to_json(),
            "image": self.image.to_json() if self.image is not None else "unknown",
            "has_infinite_kernel_class": str(self.has_infinite_kernel_class),
            "source": self.source,
        }


def exact_report(d, c, k, rank, image=None, afi=Tri.UNKNOWN, source="exact") -> InvariantReport:
    return tighten(InvariantReport(Bounds.exact(d), Bounds.exact(c), Bounds.exact(k),
                                   Bounds.exact(rank), image, afi, source))


def tighten(r: InvariantReport) -> InvariantReport:
    """Apply the consistency facts linking the four invariants on infinite X."""
    d, c, k, rank, afi = r.d, r.c, r.k, r.rank, r.all_fibers_infinite
    for _ in range(2):
        k = k.meet(hi=rank.hi)
        if k.lo > ZERO:                  # an infinite fiber collapses infinitely
            c = c.meet(lo=INF)
        if c.hi.is_fin:
            k = k.meet(hi=ZERO)
        if rank.hi.is_fin:               # finite image leaves an infinite defect
            d = d.meet(lo=INF)
        if d.hi.is_fin:
            rank = rank.meet(lo=INF)
        if afi is Tri.YES:
            c = c.meet(lo=INF)
            k = k.meet(lo=rank.lo)
            rank = rank.meet(lo=k.lo)
        if k.hi == ZERO:
            afi = Tri.NO
    return replace(r, d=d, c=c, k=k, rank=rank, all_fibers_infinite=afi)


# ---------------------------------------------------------------- leaf reports

def _rca_report(f: RcaMap) -> InvariantReport:
    inv = rca_invariants(f)
    const_vals = set(inv.K)
    afi = Tri.of(bool(const_vals) and set(f.patch) <= const_vals
                 and all(not hasattr(t, "a") for t in f.tails))
    return exact_report(inv.d, inv.c, inv.k, inv.rank, inv.image, afi)


COLPROJ_REPORT = exact_report(ZERO, INF, INF, INF, EPSet.naturals(), Tri.YES)
COLEMBED_REPORT = exact_report(INF, ZERO, ZERO, INF, None, Tri.NO)


def _combine(A: InvariantReport, B: InvariantReport) -> InvariantReport:
    """Bounds for the composite (A first, then B)."""
    d = UNBOUNDED.meet(lo=B.d.lo, hi=A.d.hi + B.d.hi)                    # R1, R2
    c = UNBOUNDED.meet(lo=A.c.lo, hi=A.c.hi + B.c.hi)                    # R3, R4
    k = UNBOUNDED.meet(hi=A.k.hi + B.k.hi)                               # R5
    rank = Bounds(Fin(1), min(A.rank.hi, B.rank.hi))                     # R7
    image = None
    afi = Tri.YES if A.all_fibers_infinite is Tri.YES else Tri.UNKNOWN
    if A.k.lo > ZERO:
        k = k.meet(lo=Fin(1))
    if A.k.lo.is_inf and B.k.hi == ZERO:                                 # R6
        k = k.meet(lo=INF)
    if A.rank.lo.is_inf and B.c.hi.is_fin:
        rank = rank.meet(lo=INF)
    if A.rank.hi.is_fin:
        rank = rank.meet(hi=A.rank.hi)
    if B.c.hi == ZERO:                                                   # R8
        c, k, rank = c & A.c, k & A.k, rank & A.rank
        d = d & (A.d + B.d)
        if A.all_fibers_infinite is not Tri.UNKNOWN:
            afi = A.all_fibers_infinite
    if A.d.hi == ZERO:                                                   # R9
        rank, d, image = rank & B.rank, d & B.d, B.image
        c = c & (A.c + B.c)
        k = k.meet(lo=B.k.lo)
        if B.all_fibers_infinite is Tri.YES:
            afi = Tri.YES
    if B.all_fibers_infinite is Tri.YES and A.d.hi.is_fin:
        # removing finitely many points leaves every infinite fiber of B nonempty
        rank, d, image = rank & B.rank, d & B.d, B.image
        k = k & B.rank
        afi = Tri.YES
    if A.k.hi == ZERO and B.k.hi == ZERO:
        afi = Tri.NO
    return tighten(InvariantReport(d, c, k, rank, image, afi, "rules"))


@lru_cache(maxsize=4096)
def term_invariants(t: Term) -> InvariantReport:
    factors = flatten(t)
    if len(factors) > 1:
        report = _leaf_report(factors[0])
        for f in factors[1:]:
            report = _combine(report, _leaf_report(f))
        return report
    return _leaf_report(factors[0])


def _leaf_report(t: Term) -> InvariantReport:
    if isinstance(t, Rca):
        return _rca_report(t.map)
    if isinstance(t, ColProj):
        return COLPROJ_REPORT
    if isinstance(t, ColEmbed):
        return COLEMBED_REPORT
    if isinstance(t, Lazy):
        return replace(instance(t).report(), source="asserted")
    raise TypeError(f"not a leaf term: {t!r}")


# ---------------------------------------------------------------- classification

FLAG_NAMES = ("FiniteRank", "Sym", "Inj", "Sur", "Cp", "IF", "FI", "CpGenerated")


@dataclass(frozen=True)
class ClassFlags:
    FiniteRank: Tri
    Sym: Tri
    Inj: Tri
    Sur: Tri
    Cp: Tri
    IF: Tri
    FI: Tri
    CpGenerated: Tri

    def __getitem__(self, name: str) -> Tri:
        return getattr(self, name)

    def items(self):
        return [(n, self[n]) for n in FLAG_NAMES]

    def yes(self) -> set[str]:
        return {n for n, v in self.items() if v is Tri.YES}

    @property
    def resolved(self) -> bool:
        return all(v is not Tri.UNKNOWN for _, v in self.items())

    def to_json(self) -> dict:
        return {n: str(v) for n, v in self.items()}


EXCLUSIONS = (("Inj", "Sur"), ("IF", "FI"), ("Cp", "FI"), ("Cp", "Inj"), ("Sur", "FI"), ("Inj", "IF"))


def flags_from_report(r: InvariantReport) -> ClassFlags:
    inf_rank = r.rank.is_inf()
    c0, d0 = r.c.is_zero(), r.d.is_zero()
    c_inf, d_inf = r.c.is_inf(), r.d.is_inf()
    return ClassFlags(
        FiniteRank=~inf_rank,
        Sym=c0 & d0,
        Inj=inf_rank & c0 & ~d0,
        Sur=inf_rank & ~c0 & d0,
        Cp=inf_rank & r.k.is_inf(),
        IF=inf_rank & c_inf & ~d_inf,
        FI=inf_rank & d_inf & ~c_inf,
        CpGenerated=r.has_infinite_kernel_class,
    )


def classify(t: Term) -> ClassFlags:
    return flags_from_report(term_invariants(t))


# ---------------------------------------------------------------- fibers

def low(t: Term, x: int):
    """A lower bound for min{n : t(n) >= x}; ``float('inf')`` if no such n,
    ``None`` when no bound is available."""
    if isinstance(t, Rca):
        return _rca_low(t.map, x)
    if isinstance(t, ColProj):
        return pair(max(x, 0), 0)
    if isinstance(t, ColEmbed):
        return triangular_root(x)
    if isinstance(t, Lazy):
        return instance(t).low(x)
    if isinstance(t, Compose):
        inner = low(t.second, x)
        if inner is None:
            return None
        if inner == float("inf"):
            return inner
        return low(t.first, inner)
    raise TypeError(t)


def _rca_low(f: RcaMap, x: int):
    for n, v in enumerate(f.patch):
        if v >= x:
            return n
    best = float("inf")
    for r, t in enumerate(f.tails):
        if hasattr(t, "a"):
            q = max(f.q0, -((t.b - x) // t.a))
            best = min(best, f.m * q + r)
        elif t.b >= x:
            best = min(best, f.N + r)
    return best


def fiber_stream(t: Term, y: int, below: int | None = None) -> Iterator[int]:
    """Strictly increasing enumeration of {n : t(n) = y}.

    With ``below`` the enumeration is restricted to n < below and always
    terminates. Without it the stream is lazily extendable; for Lazy terms it
    falls back to scanning, which does not terminate past the last member of
    a finite fiber.
    """
    factors = flatten(t)
    t = factors[0] if len(factors) == 1 else _rebuild(factors)
    if isinstance(t, Rca):
        yield from rca_fiber(t.map, y).members(below)
    elif isinstance(t, ColProj):
        for j in itertools.count():
            n = pair(y, j)
            if below is not None and n >= below:
                return
            yield n
    elif isinstance(t, ColEmbed):
        i = triangular_root(y)
        if pair(i, 0) == y and (below is None or i < below):
            yield i
    elif below is not None:
        ev = evaluator(t)
        yield from (n for n in range(below) if ev(n) == y)
    elif isinstance(t, Compose) and low(t.first, 0) is not None:
        yield from _dovetail(t.first, t.second, y)
    else:
        ev = evaluator(t)
        yield from (n for n in itertools.count() if ev(n) == y)


def _rebuild(factors: list[Term]) -> Term:
    # right-nested so that Compose.first is a single leaf
    out = factors[-1]
    for f in reversed(factors[:-1]):
        out = Compose(f, out)
    return out


def _dovetail(f: Term, g: Term, y: int) -> Iterator[int]:
    xs = fiber_stream(g, y)
    heap: list[tuple[int, int, Iterator[int]]] = []
    pending = next(xs, None)
    tick = itertools.count()

    def push(stream):
        v = next(stream, None)
        if v is not None:
            heapq.heappush(heap, (v, next(tick), stream))

    while heap or pending is not None:
        bound = float("inf") if pending is None else low(f, pending)
        if heap and heap[0][0] < bound:
            v, _, stream = heapq.heappop(heap)
            yield v
            push(stream)
        elif pending is not None:
            if bound == float("inf"):
                pending = None
                continue
            push(fiber_stream(f, pending))
            pending = next(xs, None)
        else:
            return


class _FiberCache:
    def __init__(self, t: Term, y: int):
        self.stream = fiber_stream(t, y)
        self.items: list[int] = []

    def get(self, i: int) -> int:
        while len(self.items) <= i:
            v = next(self.stream, None)
            if v is None:
                raise IndexError(f"fiber has only {len(self.items)} members")
            self.items.append(v)
        return self.items[i]


_fiber_caches: dict[tuple[Term, int], _FiberCache] = {}
_fiber_lock = threading.Lock()


def fiber_member(t: Term, y: int, i: int) -> int:
    """The i-th smallest member of t⁻¹(y) (memoized)."""
    with _fiber_lock:
        cache = _fiber_caches.get((t, y))
        if cache is None:
            cache = _fiber_caches[(t, y)] = _FiberCache(t, y)
        return cache.get(i)


# ---------------------------------------------------------------- kernel classes

class KernelScan:
    """Kernel classes of a term, numbered by order of first appearance."""

    def __init__(self, t: Term):
        self.ev = evaluator(t)
        self.ids: list[int] = []
        self.pos: list[int] = []
        self.reps: list[int] = []
        self._id_of: dict[int, int] = {}
        self._count: Counter = Counter()
        self.lock = threading.Lock()
        # classes of ColProj;ρ are unions of columns, first seen in the order
        # in which ρ(0), ρ(1), ... first takes each value
        factors = flatten(t)
        self._column_rest = None
        if isinstance(factors[0], ColProj):
            rest = factors[1:]
            self._column_rest = rest[0] if len(rest) == 1 else (_rebuild(rest) if rest else Rca(identity()))

    def _extend(self, n: int):
        while len(self.ids) <= n:
            x = len(self.ids)
            v = self.ev(x)
            cid = self._id_of.get(v)
            if cid is None:
                cid = self._id_of[v] = len(self.reps)
                self.reps.append(x)
            self.ids.append(cid)
            self.pos.append(self._count[cid])
            self._count[cid] += 1

    def class_index(self, n: int) -> int:
        with self.lock:
            self._extend(n)
            return self.ids[n]

    def position(self, n: int) -> int:
        """Number of earlier members of n's class."""
        with self.lock:
            self._extend(n)
            return self.pos[n]

    def representative(self, cid: int, limit: int = 10**7) -> int:
        """Least member of class ``cid``; scans until the class appears."""
        if self._column_rest is not None:
            return pair(kernel_scan(self._column_rest).representative(cid, limit), 0)
        with self.lock:
            while len(self.reps) <= cid:
                if len(self.ids) >= limit:
                    raise LookupError(f"class {cid} not seen below {limit}")
                self._extend(len(self.ids) + 1023)
            return self.reps[cid]


_scans: dict[Term, KernelScan] = {}
_scans_lock = threading.Lock()


def kernel_scan(t: Term) -> KernelScan:
    with _scans_lock:
        s = _scans.get(t)
        if s is None:
            s = _scans[t] = KernelScan(t)
        return s


def class_index(t: Term, n: int) -> int:
    return kernel_scan(t).class_index(n)


# ---------------------------------------------------------------- infinite fibers

def k_set(t: Term) -> EPSet | None:
    """K(t) (image points with infinite fiber) when decidable for the shape of t."""
    factors = flatten(t)
    if len(factors) == 1:
        f = factors[0]
        if isinstance(f, ColProj):
            return EPSet.naturals()
        if isinstance(f, Rca):
            return EPSet.finite(rca_invariants(f.map).K)
        if isinstance(f, ColEmbed):
            return EPSet.empty()
        return None
    if len(factors) == 2:
        a, b = factors
        if isinstance(b, ColProj) and isinstance(a, Rca) and rca_invariants(a.map).d.is_fin:
            return EPSet.naturals()
        if isinstance(a, ColProj) and isinstance(b, Rca):
            return rca_invariants(b.map).image
    return None


# ---------------------------------------------------------------- windows

@dataclass
class WindowReport:
    W: int
    c_obs: int
    distinct: int
    largest_fibers: list[tuple[int, int]] = field(default_factory=list)
    missing_below_max: int = 0
    fiber_sizes: dict[int, int] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {"W": self.W, "c_obs": self.c_obs, "distinct": self.distinct,
                "largest_fibers": [list(p) for p in self.largest_fibers],
                "missing_below_max": self.missing_below_max}


def window_report(t: Term, W: int, top: int = 5) -> WindowReport:
    if W < 1:
        raise ValueError("window must be positive")
    ev = evaluator(t)
    counts = Counter(ev(n) for n in range(W))
    largest = sorted(counts.items(), key=lambda p: (-p[1], p[0]))[:top]
    hi = max(counts)
    return WindowReport(W, W - len(counts), len(counts), largest,
                        hi + 1 - len(counts), dict(counts))


def window_contradictions(t: Term, W: int) -> list[str]:
    """Ways in which the window evidence contradicts the reported invariants."""
    r = term_invariants(t)
    w = window_report(t, W)
    out = []
    if r.c.hi.is_fin and w.c_obs > r.c.hi.value:
        out.append(f"c_obs={w.c_obs} exceeds c<={r.c.hi}")
    if r.rank.hi.is_fin and w.distinct > r.rank.hi.value:
        out.append(f"{w.distinct} distinct values exceed rank<={r.rank.hi}")
    if r.image is not None:
        stray = [v for v in w.fiber_sizes if v not in r.image]
        if stray:
            out.append(f"value {stray[0]} outside the reported image")
    return out
