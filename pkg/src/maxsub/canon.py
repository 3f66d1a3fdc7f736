"""The named transformations used throughout the examples and tests."""
from .rca import Affine, Const, RcaMap, identity
from .terms import ColEmbed, ColProj, Rca

succ = Rca(RcaMap.make([Affine(1, 1)]))
dbl = Rca(RcaMap.make([Affine(2, 0)]))
half = Rca(RcaMap.make([Affine(1, 0), Affine(1, 0)]))
pred = Rca(RcaMap.make([Affine(1, -1)], patch=[0]))
cst0 = Rca(RcaMap.make([Const(0)]))
mix = Rca(RcaMap.make([Const(5), Affine(1, 0)]))
ident = Rca(identity())
colproj = ColProj()
colembed = ColEmbed()

NAMED = {
    "succ": succ, "dbl": dbl, "half": half, "pred": pred, "cst0": cst0, "mix": mix,
    "id": ident, "identity": ident, "colproj": colproj, "colembed": colembed,
}
