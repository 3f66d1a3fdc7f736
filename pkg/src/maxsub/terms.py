"""Terms: a closed algebra of transformations of N.

Leaves are residue-class affine maps (:class:`Rca`), the column projection
``ColProj`` (n = π(i, j) ↦ i), the column embedding ``ColEmbed`` (i ↦ π(i, 0))
and :class:`Lazy` terms produced by named constructions. ``Compose(f, g)``
applies ``f`` first, then ``g``.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Any, Callable, Union

from .epset import EPSet
from .pairing import column, pair
from .rca import RcaMap, identity, rca_compose


class ParseError(ValueError):
    def __init__(self, offset: int, reason: str):
        super().__init__(f"parse error at byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason


@dataclass(frozen=True)
class Rca:
    map: RcaMap

    def __str__(self):
        return str(self.map)


@dataclass(frozen=True)
class ColProj:
    def __str__(self):
        return "ColProj"


@dataclass(frozen=True)
class ColEmbed:
    def __str__(self):
        return "ColEmbed"


@dataclass(frozen=True)
class Compose:
    first: Term
    second: Term

    def __str__(self):
        return f"({self.first} ; {self.second})"


@dataclass(frozen=True)
class Lazy:
    name: str
    params: tuple[tuple[str, Any], ...]

    @classmethod
    def of(cls, name: str, **params) -> Lazy:
        return cls(name, tuple(sorted(params.items())))

    def param(self, key: str):
        return dict(self.params)[key]

    def __str__(self):
        return f"{self.name}(…)"


Term = Union[Rca, ColProj, ColEmbed, Compose, Lazy]


def compose(*terms: Term) -> Term:
    """Left-to-right composite of one or more terms."""
    out = terms[0]
    for t in terms[1:]:
        out = Compose(out, t)
    return out


# ---------------------------------------------------------------- lazy registry

class Construction:
    """Base class for named constructions backing :class:`Lazy` terms.

    Subclasses receive the Lazy parameters as keyword arguments and implement
    ``__call__(n)`` and ``report()``. ``low(x)`` should return a lower bound
    for ``min{n : t(n) >= x}`` when one is cheaply available.
    """

    name: str = ""

    def __call__(self, n: int) -> int:
        raise NotImplementedError

    def report(self):
        raise NotImplementedError

    def low(self, x: int):
        return None


CONSTRUCTIONS: dict[str, type[Construction]] = {}
_instances: dict[Lazy, Construction] = {}
_instances_lock = threading.Lock()


def register(cls: type[Construction]) -> type[Construction]:
    CONSTRUCTIONS[cls.name] = cls
    return cls


def instance(t: Lazy) -> Construction:
    with _instances_lock:
        inst = _instances.get(t)
        if inst is None:
            try:
                factory = CONSTRUCTIONS[t.name]
            except KeyError:
                raise ValueError(f"unknown lazy construction {t.name!r}") from None
            inst = _instances[t] = factory(**dict(t.params))
        return inst


# ---------------------------------------------------------------- evaluation

def flatten(t: Term) -> list[Term]:
    """Composite factors in application order, with adjacent Rca factors
    merged and ColEmbed;ColProj pairs cancelled."""
    if isinstance(t, Compose):
        raw = flatten(t.first) + flatten(t.second)
    else:
        return [t]
    out: list[Term] = []
    for f in raw:
        if out and isinstance(out[-1], Rca) and isinstance(f, Rca):
            out[-1] = Rca(rca_compose(out[-1].map, f.map))
        elif out and isinstance(out[-1], ColEmbed) and isinstance(f, ColProj):
            out[-1] = Rca(identity())
        else:
            out.append(f)
        if len(out) >= 2 and isinstance(out[-1], Rca) and isinstance(out[-2], Rca):
            last = out.pop()
            out[-1] = Rca(rca_compose(out[-1].map, last.map))
    return out


def simplify(t: Term) -> Term:
    return compose(*flatten(t))


def _leaf_eval(t: Term, n: int) -> int:
    if isinstance(t, Rca):
        return t.map(n)
    if isinstance(t, ColProj):
        return column(n)
    if isinstance(t, ColEmbed):
        return pair(n, 0)
    if isinstance(t, Lazy):
        return instance(t)(n)
    raise TypeError(f"not a term: {t!r}")


def term_eval(t: Term, n: int) -> int:
    if n < 0:
        raise ValueError("terms act on nonnegative integers")
    stack = [t]
    # iterative right-action walk: leftmost factor first
    factors = []
    while stack:
        s = stack.pop()
        if isinstance(s, Compose):
            stack.append(s.second)
            stack.append(s.first)
        else:
            factors.append(s)
    for f in factors:
        n = _leaf_eval(f, n)
    return n


def evaluator(t: Term) -> Callable[[int], int]:
    factors = flatten(t)
    if len(factors) == 1:
        return lambda n: _leaf_eval(factors[0], n)

    def run(n: int) -> int:
        for f in factors:
            n = _leaf_eval(f, n)
        return n
    return run


# ---------------------------------------------------------------- serialization

def to_json(t: Term) -> dict:
    if isinstance(t, Rca):
        return t.map.to_json()
    if isinstance(t, ColProj):
        return {"type": "colproj"}
    if isinstance(t, ColEmbed):
        return {"type": "colembed"}
    if isinstance(t, Compose):
        return {"type": "compose", "first": to_json(t.first), "second": to_json(t.second)}
    if isinstance(t, Lazy):
        return {"type": "lazy", "name": t.name, "params": {k: _param_json(v) for k, v in t.params}}
    raise TypeError(f"not a term: {t!r}")


def _param_json(v):
    if isinstance(v, (Rca, ColProj, ColEmbed, Compose, Lazy)):
        return to_json(v)
    if isinstance(v, EPSet):
        return {"type": "epset", **v.to_json()}
    return v


def serialize(t: Term) -> str:
    return json.dumps(to_json(t), sort_keys=True, separators=(",", ":"))


def _object_spans(text: str) -> list[int]:
    """Start offsets of JSON objects in completion (post-) order."""
    starts, stack = [], []
    in_str = esc = False
    for i, ch in enumerate(text):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "{":
            stack.append(i)
        elif ch == "}" and stack:
            starts.append(stack.pop())
    return starts


class _Spanned(dict):
    offset = 0


def parse_term(text: str | bytes) -> Term:
    """Parse the JSON term form; errors carry a byte offset."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    spans = iter(_object_spans(text))

    def hook(pairs):
        d = _Spanned(pairs)
        d.offset = next(spans, 0)
        return d

    try:
        obj = json.loads(text, object_pairs_hook=hook)
    except json.JSONDecodeError as e:
        raise ParseError(len(text[: e.pos].encode("utf-8")), e.msg) from None
    return _from_obj(obj, text)


def term_from_json(obj) -> Term:
    return _from_obj(obj, None)


def _from_obj(obj, text) -> Term:
    def offset(o):
        off = getattr(o, "offset", 0)
        return len(text[:off].encode("utf-8")) if text else off

    def fail(o, reason):
        raise ParseError(offset(o), reason)

    def build(o) -> Term:
        if not isinstance(o, dict):
            fail(o, "expected a JSON object")
        kind = o.get("type")
        if kind == "rca":
            try:
                return Rca(RcaMap.from_json(o))
            except (KeyError, TypeError, ValueError) as e:
                fail(o, f"invalid rca map: {e}")
        if kind == "colproj":
            return ColProj()
        if kind == "colembed":
            return ColEmbed()
        if kind == "compose":
            if "first" not in o or "second" not in o:
                fail(o, "compose needs 'first' and 'second'")
            return Compose(build(o["first"]), build(o["second"]))
        if kind == "lazy":
            name = o.get("name")
            if name not in CONSTRUCTIONS:
                fail(o, f"unknown lazy construction {name!r}")
            params = {}
            for k, v in (o.get("params") or {}).items():
                params[k] = param(v)
            return Lazy.of(name, **params)
        fail(o, f"unknown term type {kind!r}")

    def param(v):
        if isinstance(v, dict):
            if v.get("type") == "epset":
                return EPSet.from_json(v)
            return build(v)
        if isinstance(v, list):
            return tuple(param(x) for x in v)
        return v

    return build(obj)
