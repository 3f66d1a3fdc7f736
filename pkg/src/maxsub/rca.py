"""Residue-class affine maps of N.

An :class:`RcaMap` is given by a finite patch (the images of ``0..N-1``) and,
for each residue ``r`` modulo ``m``, a tail rule applied to every ``n >= N``
with ``n = q*m + r``: either an affine function ``a*q + b`` (``a > 0``) or a
constant. The class is closed under composition and every invariant used in
the classification (defect, collapse, infinite contractive index, rank) is
computable exactly.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import floor, gcd
from typing import Union

from .epset import EPSet, _divisors, lcm
from .extnat import INF, ExtNat, Fin


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class Affine:
    a: int
    b: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"affine tail needs a positive slope, got a={self.a}")

    def at(self, q: int) -> int:
        return self.a * q + self.b

    def to_json(self):
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Const:
    b: int

    def __post_init__(self):
        if self.b < 0:
            raise ValueError(f"constant tail must be nonnegative, got {self.b}")

    def at(self, q: int) -> int:
        return self.b

    def to_json(self):
        return {"kind": "const", "b": self.b}


TailRule = Union[Affine, Const]


def tail_from_json(obj: dict) -> TailRule:
    kind = obj.get("kind")
    if kind == "affine":
        return Affine(int(obj["a"]), int(obj["b"]))
    if kind == "const":
        return Const(int(obj["b"]))
    raise ValueError(f"unknown tail kind {kind!r}")


@dataclass(frozen=True)
class RcaMap:
    N: int
    m: int
    patch: tuple[int, ...]
    tails: tuple[TailRule, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("modulus must be positive")
        if self.N < 0 or self.N % self.m:
            raise ValueError(f"threshold N={self.N} must be a nonnegative multiple of m={self.m}")
        if len(self.patch) != self.N:
            raise ValueError(f"patch has {len(self.patch)} values, expected N={self.N}")
        if len(self.tails) != self.m:
            raise ValueError(f"expected {self.m} tail rules, got {len(self.tails)}")
        if any(v < 0 for v in self.patch):
            raise ValueError("patch values must be nonnegative")
        q0 = self.N // self.m
        for r, t in enumerate(self.tails):
            if isinstance(t, Affine) and t.at(q0) < 0:
                raise ValueError(f"tail {r} takes negative value {t.at(q0)} at n={q0 * self.m + r}")

    @classmethod
    def make(cls, tails, patch=(), m: int | None = None) -> RcaMap:
        tails = tuple(tails)
        return cls(len(patch), m or len(tails), tuple(patch), tails)

    def __call__(self, n: int) -> int:
        if n < self.N:
            return self.patch[n]
        q, r = divmod(n, self.m)
        return self.tails[r].at(q)

    eval = __call__

    @property
    def q0(self) -> int:
        return self.N // self.m

    def tail_at(self, rho: int, M: int) -> TailRule:
        """Tail rule of the refined class ``rho`` modulo ``M`` (a multiple of m)."""
        r = rho % self.m
        t = self.tails[r]
        if isinstance(t, Const):
            return t
        k = M // self.m
        return Affine(t.a * k, t.a * ((rho - r) // self.m) + t.b)

    def refine(self, M: int, N: int) -> RcaMap:
        assert M % self.m == 0 and N % M == 0 and N >= self.N
        return RcaMap(N, M, tuple(self(n) for n in range(N)), tuple(self.tail_at(r, M) for r in range(M)))

    def has_const_tail(self) -> bool:
        return any(isinstance(t, Const) for t in self.tails)

    # serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {"type": "rca", "N": self.N, "m": self.m, "patch": list(self.patch),
                "tails": [t.to_json() for t in self.tails]}

    @classmethod
    def from_json(cls, obj: dict | str) -> RcaMap:
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["N"]), int(obj["m"]), tuple(int(v) for v in obj["patch"]),
                   tuple(tail_from_json(t) for t in obj["tails"]))

    def __str__(self):
        parts = []
        for r, t in enumerate(self.tails):
            cls = f"n≡{r} (mod {self.m})" if self.m > 1 else "n"
            if isinstance(t, Const):
                parts.append(f"{cls} ↦ {t.b}")
            else:
                parts.append(f"{cls} ↦ {t.a}·⌊n/{self.m}⌋{t.b:+d}" if self.m > 1 else f"n ↦ {t.a}n{t.b:+d}")
        head = f"patch={list(self.patch)}; " if self.N else ""
        return f"Rca({head}{'; '.join(parts)})"


# ---------------------------------------------------------------- builders

def identity() -> RcaMap:
    return RcaMap(0, 1, (), (Affine(1, 0),))


def constant(b: int) -> RcaMap:
    return RcaMap(0, 1, (), (Const(b),))


def normalize(f: RcaMap) -> RcaMap:
    """Reduce to the smallest modulus and threshold describing the same map."""
    M = f.m
    for d in _divisors(M):
        if d == M:
            break
        k = M // d
        new_tails = []
        for r in range(d):
            cls = [f.tails[r + d * i] for i in range(k)]
            if all(isinstance(t, Const) for t in cls):
                if len({t.b for t in cls}) != 1:
                    break
                new_tails.append(cls[0])
            elif all(isinstance(t, Affine) for t in cls):
                a = cls[0].a
                if a % k or any(t.a != a for t in cls):
                    break
                step = a // k
                if any(t.b != cls[0].b + step * i for i, t in enumerate(cls)):
                    break
                new_tails.append(Affine(step, cls[0].b))
            else:
                break
        else:
            f = RcaMap(f.N, d, f.patch, tuple(new_tails))
            break
    N, m = f.N, f.m
    while N >= m:
        if any(f.patch[n] != f.tails[n % m].at(n // m) for n in range(N - m, N)):
            break
        N -= m
    if N != f.N:
        f = RcaMap(N, m, f.patch[:N], f.tails)
    return f


def rca_eval(alpha: RcaMap, n: int) -> int:
    return alpha(n)


def rca_compose(alpha: RcaMap, beta: RcaMap) -> RcaMap:
    """The map n ↦ beta(alpha(n)) (alpha first)."""
    L = 1
    for t in alpha.tails:
        if isinstance(t, Affine):
            L = lcm(L, beta.m // gcd(t.a, beta.m))
    M = alpha.m * L
    q_min = max(0, _ceil_div(alpha.N, M))
    refined = [alpha.tail_at(rho, M) for rho in range(M)]
    for t in refined:
        if isinstance(t, Affine):
            q_min = max(q_min, _ceil_div(beta.N - t.b, t.a))
    tails = []
    for t in refined:
        if isinstance(t, Const):
            tails.append(Const(beta(t.b)))
            continue
        s = t.b % beta.m
        bt = beta.tails[s]
        if isinstance(bt, Const):
            tails.append(bt)
        else:
            tails.append(Affine(bt.a * (t.a // beta.m), bt.a * ((t.b - s) // beta.m) + bt.b))
    N = M * q_min
    patch = tuple(beta(alpha(n)) for n in range(N))
    return normalize(RcaMap(N, M, patch, tuple(tails)))


def piecewise(region: EPSet, inside: RcaMap, outside: RcaMap) -> RcaMap:
    """n ↦ inside(n) for n in region, outside(n) otherwise."""
    M = lcm(lcm(region.m, inside.m), outside.m)
    N = _ceil_div(max(region.N, inside.N, outside.N), M) * M
    tails = tuple(inside.tail_at(rho, M) if rho % region.m in region.R else outside.tail_at(rho, M)
                  for rho in range(M))
    patch = tuple(inside(n) if n in region else outside(n) for n in range(N))
    return normalize(RcaMap(N, M, patch, tails))


def enumerator(s: EPSet) -> RcaMap:
    """k ↦ k-th smallest member of an infinite EPSet."""
    if s.is_finite:
        raise ValueError("enumerator needs an infinite set")
    p = len(s.F)
    block = s._tail_block()
    M = len(block)
    N = _ceil_div(p, M) * M
    tails = []
    for rho in range(M):
        i = (rho - p) % M
        c = (rho - p - i) // M
        tails.append(Affine(s.m, block[i] + s.m * c))
    return normalize(RcaMap(N, M, tuple(s.kth(k) for k in range(N)), tuple(tails)))


def ranker(s: EPSet) -> RcaMap:
    """n ↦ number of members of s below n (the position of n when n ∈ s)."""
    m = s.m
    N = _ceil_div(s.N, m) * m
    base = s.rank(N)
    tails = []
    for rho in range(m):
        below = sum(1 for r in s.R if r < rho)
        if s.R:
            tails.append(Affine(len(s.R), base - len(s.R) * (N // m) + below))
        else:
            tails.append(Const(base))
    return normalize(RcaMap(N, m, tuple(s.rank(n) for n in range(N)), tuple(tails)))


# ---------------------------------------------------------------- invariants

@dataclass
class RcaInvariants:
    d: ExtNat
    c: ExtNat
    k: ExtNat
    rank: ExtNat
    image: EPSet
    defect_set: EPSet
    K: list[int] = field(default_factory=list)
    has_infinite_kernel_class: bool = False


def tail_progression(f: RcaMap, r: int) -> EPSet:
    t = f.tails[r]
    if isinstance(t, Const):
        return EPSet.finite([t.b])
    return EPSet.progression(t.at(f.q0), t.a)


def affine_image(f: RcaMap) -> EPSet:
    img = EPSet.empty()
    for r, t in enumerate(f.tails):
        if isinstance(t, Affine):
            img = img | tail_progression(f, r)
    return img


def image(f: RcaMap) -> EPSet:
    img = EPSet.finite(set(f.patch) | {t.b for t in f.tails if isinstance(t, Const)})
    return img | affine_image(f)


def rca_invariants(f: RcaMap) -> RcaInvariants:
    img = image(f)
    defect = img.complement()
    const_vals = sorted({t.b for t in f.tails if isinstance(t, Const)})
    affine = [r for r, t in enumerate(f.tails) if isinstance(t, Affine)]
    if const_vals:
        c = INF
    elif any(not (tail_progression(f, r) & tail_progression(f, s)).is_empty()
             for r, s in combinations(affine, 2)):
        c = INF
    else:
        tail_img = affine_image(f)
        counts = Counter(f.patch)
        c = Fin(sum(n + (v in tail_img) - 1 for v, n in counts.items()))
    return RcaInvariants(
        d=defect.card(), c=c, k=Fin(len(const_vals)), rank=img.card(),
        image=img, defect_set=defect, K=const_vals,
        has_infinite_kernel_class=bool(const_vals),
    )


def fiber(f: RcaMap, y: int) -> EPSet:
    """The preimage f⁻¹(y) as an EPSet."""
    pts = {n for n, v in enumerate(f.patch) if v == y}
    out = EPSet.empty()
    for r, t in enumerate(f.tails):
        if isinstance(t, Const):
            if t.b == y:
                out = out | EPSet.make(f.N, f.m, {r})
        elif (y - t.b) % t.a == 0 and (y - t.b) // t.a >= f.q0:
            pts.add(f.m * ((y - t.b) // t.a) + r)
    return out | EPSet.finite(pts)


def least_preimage(f: RcaMap, y: int) -> int | None:
    best = None
    for n, v in enumerate(f.patch):
        if v == y:
            return n
    for r, t in enumerate(f.tails):
        if isinstance(t, Const):
            n = f.N + r if t.b == y else None
        elif (y - t.b) % t.a == 0 and (y - t.b) // t.a >= f.q0:
            n = f.m * ((y - t.b) // t.a) + r
        else:
            n = None
        if n is not None and (best is None or n < best):
            best = n
    return best


def rca_section(f: RcaMap) -> tuple[RcaMap, EPSet]:
    """Least-preimage section: y ↦ min f⁻¹(y) on the image, 0 elsewhere."""
    affine = [(r, t) for r, t in enumerate(f.tails) if isinstance(t, Affine)]
    L = 1
    for _, t in affine:
        L = lcm(L, t.a)
    T = max([v + 1 for v in f.patch] + [t.b + 1 for t in f.tails if isinstance(t, Const)]
            + [t.at(f.q0) + 1 for _, t in affine] + [0])
    # beyond the crossing points the winning tail in each class is fixed
    for (r, t), (s, u) in combinations(affine, 2):
        if t.a != u.a:
            slope = Fraction(f.m, t.a) - Fraction(f.m, u.a)
            rhs = Fraction(f.m * t.b, t.a) - r - Fraction(f.m * u.b, u.a) + s
            T = max(T, floor(rhs / slope) + 1)
    T = _ceil_div(T, L) * L
    tails = []
    for rho in range(L):
        cands = [(r, t) for r, t in affine if (rho - t.b) % t.a == 0]
        if not cands:
            tails.append(Const(0))
            continue
        r, t = min(cands, key=lambda c: (Fraction(f.m, c[1].a), Fraction(-f.m * c[1].b, c[1].a) + c[0]))
        tails.append(Affine(f.m * L // t.a, f.m * (rho - t.b) // t.a + r))
    patch = []
    for y in range(T):
        n = least_preimage(f, y)
        patch.append(0 if n is None else n)
    return normalize(RcaMap(T, L, tuple(patch), tuple(tails))), image(f)


def fixed_points(f: RcaMap) -> EPSet:
    """{n : f(n) = n}."""
    pts = {n for n in range(f.N) if f.patch[n] == n}
    out = EPSet.empty()
    for r, t in enumerate(f.tails):
        # n = m q + r with q >= q0
        if isinstance(t, Const):
            if t.b >= f.N and t.b % f.m == r:
                pts.add(t.b)
        elif t.a == f.m:
            if t.b == r:
                out = out | EPSet.make(f.N, f.m, {r})
        else:
            num, den = r - t.b, t.a - f.m
            if num % den == 0 and num // den >= f.q0:
                pts.add(f.m * (num // den) + r)
    return out | EPSet.finite(pts)


def transversal(f: RcaMap) -> EPSet:
    """Canonical transversal of ker f: the least element of every fiber."""
    s, _ = rca_section(f)
    return fixed_points(rca_compose(f, s))
