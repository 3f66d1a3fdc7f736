"""Seeded random generators shared by the test modules."""
import random

from maxsub.rca import Affine, Const, RcaMap
from maxsub.terms import ColEmbed, ColProj, Rca, compose


def random_rca(rng: random.Random, const_weight: float = 0.25) -> RcaMap:
    m = rng.randint(1, 3)
    q0 = rng.randint(0, 2)
    tails = []
    for _ in range(m):
        if rng.random() < const_weight:
            tails.append(Const(rng.randint(0, 6)))
        else:
            a = rng.randint(1, 3)
            tails.append(Affine(a, rng.randint(-a * q0, 4)))
    patch = [rng.randint(0, 8) for _ in range(q0 * m)]
    return RcaMap(q0 * m, m, tuple(patch), tuple(tails))


def random_leaf(rng: random.Random, col_weight: float = 0.3):
    x = rng.random()
    if x < col_weight / 2:
        return ColProj()
    if x < col_weight:
        return ColEmbed()
    return Rca(random_rca(rng))


def random_term(rng: random.Random, max_depth: int = 3, col_weight: float = 0.3):
    depth = rng.randint(1, max_depth)
    return compose(*(random_leaf(rng, col_weight) for _ in range(depth)))
