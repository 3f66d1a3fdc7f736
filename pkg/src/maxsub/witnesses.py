"""Constructive factorizations behind the generation arguments.

Each ``w_*`` function builds the factors whose existence the corresponding
generation argument asserts and returns a :class:`WitnessCertificate` that
checks the factor identity pointwise on a window and checks the class flags
the factors are required to have.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .engine import (Bounds, InvariantReport, Tri, classify, exact_report, fiber_member,
                     k_set, kernel_scan, term_invariants, tighten, window_contradictions)
from .epset import EPSet
from .extnat import INF, ZERO, Fin
from .pairing import column, pair, unpair
from .rca import (Affine, Const, RcaMap, constant, enumerator, fiber, identity, piecewise,
                  ranker, rca_compose, rca_invariants, rca_section, transversal)
from .terms import (ColEmbed, ColProj, Compose, Construction, Lazy, Rca, Term, compose,
                    evaluator, flatten, register, serialize)

DEFAULT_WINDOW = 10_000


class PreconditionViolation(ValueError):
    def __init__(self, message: str, role: str = "", flag: str = ""):
        super().__init__(message)
        self.role = role
        self.flag = flag


class NoInfiniteClass(PreconditionViolation):
    pass


class UnsupportedStructure(ValueError):
    pass


@dataclass
class FlagCheck:
    role: str
    flag: str
    expected: Tri
    actual: Tri
    basis: str                 # "exact", "rules" or "asserted"
    contradictions: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.actual is self.expected and not self.contradictions


@dataclass
class WitnessCertificate:
    name: str
    factors: list[tuple[str, Term]]
    equation: str
    W: int
    verified: bool
    identity_holds: bool
    first_mismatch: int | None
    flags: list[FlagCheck]

    def factor(self, role: str) -> Term:
        return dict(self.factors)[role]

    def to_json(self) -> dict:
        return {
            "witness": self.name,
            "equation": self.equation,
            "window": self.W,
            "identity_holds": self.identity_holds,
            "first_mismatch": self.first_mismatch,
            "verified": self.verified,
            "factors": {role: serialize(t) for role, t in self.factors},
            "required_flags": [
                {"role": f.role, "flag": f.flag, "expected": str(f.expected),
                 "actual": str(f.actual), "basis": f.basis, "contradictions": f.contradictions}
                for f in self.flags
            ],
        }

    def to_text(self) -> str:
        lines = [f"witness {self.name}", f"window W = {self.W}",
                 f"equation: {self.equation}  [{'holds' if self.identity_holds else f'fails at n={self.first_mismatch}'} on [0,{self.W})]"]
        for role, t in self.factors:
            lines.append(f"  {role} = {serialize(t)}")
        for f in self.flags:
            mark = "ok" if f.ok else "FAIL"
            extra = f" ({'; '.join(f.contradictions)})" if f.contradictions else ""
            lines.append(f"  {f.role}.{f.flag} = {f.actual} (expected {f.expected}, {f.basis}) {mark}{extra}")
        lines.append(f"verified = {str(self.verified).lower()}")
        return "\n".join(lines)


def _basis(t: Term) -> str:
    return term_invariants(t).source


def certify(name: str, factors: list[tuple[str, Term]], lhs: Term, rhs: Term, equation: str,
            required: list[tuple[str, str, Tri]], W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    left, right = evaluator(lhs), evaluator(rhs)
    mismatch = next((n for n in range(W) if left(n) != right(n)), None)
    roles = dict(factors)
    checks = []
    for role, flag, expected in required:
        t = roles[role]
        basis = _basis(t)
        contra = window_contradictions(t, W) if basis != "exact" else []
        checks.append(FlagCheck(role, flag, expected, classify(t)[flag], basis, contra))
    verified = mismatch is None and all(c.ok for c in checks)
    return WitnessCertificate(name, factors, equation, W, verified, mismatch is None, mismatch, checks)


# ---------------------------------------------------------------- helpers

def _need(t: Term, role: str, **flags: Tri):
    cf = classify(t)
    for flag, want in flags.items():
        if cf[flag] is not want:
            raise PreconditionViolation(f"{role} must have {flag}={want}, got {cf[flag]}", role, flag)


def _rca(t: Term, role: str) -> RcaMap:
    factors = flatten(t)
    if len(factors) != 1 or not isinstance(factors[0], Rca):
        raise UnsupportedStructure(f"{role} must be a residue-class affine term")
    return factors[0].map


def _lazy_map(t) -> RcaMap:
    return _rca(t, "parameter")


# ---------------------------------------------------------------- Rca-only witnesses

def w_inj(alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """γ with αγ = β: α⁻¹β on im α, the constant min im β on D(α)."""
    _need(alpha, "alpha", Inj=Tri.YES)
    _need(beta, "beta", Inj=Tri.YES)
    a, b = _rca(alpha, "alpha"), _rca(beta, "beta")
    s, dom = rca_section(a)
    const = rca_invariants(b).image.min()
    gamma = Rca(piecewise(dom, rca_compose(s, b), constant(const)))
    return certify("w_inj", [("gamma", gamma)], Compose(alpha, gamma), beta,
                   "compose(alpha, gamma) = beta", [("gamma", "Inj", Tri.NO)], W)


def w_sur(alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """δ with δα = β: β followed by the least-preimage section of α."""
    _need(alpha, "alpha", Sur=Tri.YES)
    _need(beta, "beta", Sur=Tri.YES)
    a = _rca(alpha, "alpha")
    _rca(beta, "beta")
    s, _ = rca_section(a)
    delta = Compose(beta, Rca(s))
    return certify("w_sur", [("delta", delta)], Compose(delta, alpha), beta,
                   "compose(delta, alpha) = beta", [("delta", "Sur", Tri.NO)], W)


def w_sym_from_inj(beta: Term, target: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """γ with βγ = target: identity on D(β), β⁻¹·target on im β."""
    _need(beta, "beta", Inj=Tri.YES)
    _need(target, "alpha_target", Sym=Tri.YES)
    b, t = _rca(beta, "beta"), _rca(target, "alpha_target")
    s, dom = rca_section(b)
    gamma = Rca(piecewise(dom, rca_compose(s, t), identity()))
    return certify("w_sym_from_inj", [("gamma", gamma)], Compose(beta, gamma), target,
                   "compose(beta, gamma) = alpha_target", [("gamma", "Sur", Tri.YES)], W)


def w_left_gen_fi(alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """γ ∈ FI with γα = β, for α the column projection and β injective."""
    _need(alpha, "alpha", Cp=Tri.YES, Sur=Tri.YES)
    _need(beta, "beta", Inj=Tri.YES)
    if flatten(alpha) != [ColProj()]:
        raise UnsupportedStructure("alpha must be ColProj (its transversal is the image of ColEmbed)")
    gamma = Compose(beta, ColEmbed())
    return certify("w_left_gen_fi", [("gamma", gamma)], Compose(gamma, alpha), beta,
                   "compose(gamma, alpha) = beta", [("gamma", "FI", Tri.YES)], W)


def _interleave_targets(targets: EPSet) -> RcaMap:
    """i ↦ target assigned to the i-th point of the defect set."""
    if targets.is_finite:
        t = sorted(targets.F)
        return RcaMap(len(t) - 1, 1, tuple(t[:-1]), (Const(t[-1]),))
    even_to_index = RcaMap(0, 2, (), (Affine(1, 0), Const(0)))
    return rca_compose(even_to_index, enumerator(targets))


def w_right_gen(kind: str, alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """γ with αγ = β for α ∈ FI ∩ Inj and β ∈ Inj; γ ∈ IF or γ ∈ C_p."""
    _need(alpha, "alpha", FI=Tri.YES, Inj=Tri.YES)
    _need(beta, "beta", Inj=Tri.YES)
    a, b = _rca(alpha, "alpha"), _rca(beta, "beta")
    if kind == "IF":
        s, img = rca_section(a)
        outside = rca_invariants(a).defect_set
        targets = rca_invariants(b).defect_set | EPSet.finite([a(0)])
        off_image = rca_compose(ranker(outside), _interleave_targets(targets))
        gamma: Term = Rca(piecewise(img, rca_compose(s, b), off_image))
    elif kind == "Cp":
        gamma = Lazy.of("w_right_gen_cp", alpha=Rca(a), beta=Rca(b))
    else:
        raise ValueError(f"kind must be IF or Cp, got {kind!r}")
    return certify(f"w_right_gen[{kind}]", [("gamma", gamma)], Compose(alpha, gamma), beta,
                   "compose(alpha, gamma) = beta", [("gamma", kind, Tri.YES)], W)


@register
class RightGenCp(Construction):
    """γ(α(k)) = β(k); the j-th point of D(α) goes to β(column(j))."""

    name = "w_right_gen_cp"

    def __init__(self, alpha, beta):
        self.a, self.b = _lazy_map(alpha), _lazy_map(beta)
        self.section, self.img = rca_section(self.a)
        self.outside = rca_invariants(self.a).defect_set

    def __call__(self, n):
        if n in self.img:
            return self.b(self.section(n))
        return self.b(column(self.outside.rank(n)))

    def report(self):
        inv = rca_invariants(self.b)
        return exact_report(inv.d, INF, INF, INF, inv.image)


# ---------------------------------------------------------------- dual (IF / FI)

def w_dual(kind: str, alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """β = γαδ with γ, δ outside the class (kind is IF or FI)."""
    if kind not in ("IF", "FI"):
        raise ValueError(f"kind must be IF or FI, got {kind!r}")
    _need(alpha, "alpha", **{kind: Tri.YES})
    _need(beta, "beta", **{kind: Tri.YES})
    a, b = Rca(_rca(alpha, "alpha")), Rca(_rca(beta, "beta"))
    gamma = Lazy.of("w_dual_gamma", alpha=a, beta=b)
    delta = Lazy.of("w_dual_delta", alpha=a, beta=b)
    return certify(f"w_dual[{kind}]", [("gamma", gamma), ("delta", delta)],
                   compose(gamma, alpha, delta), beta, "compose(compose(gamma, alpha), delta) = beta",
                   [("gamma", kind, Tri.NO), ("delta", kind, Tri.NO)], W)


@register
class DualGamma(Construction):
    """ker γ = ker β, and γ sends the k-th class of β onto the k-th point of the
    least-element transversal of ker α."""

    name = "w_dual_gamma"

    def __init__(self, alpha, beta):
        self.a = _lazy_map(alpha)
        self.beta = beta
        self.trans = transversal(self.a)
        self.scan = kernel_scan(beta)

    def __call__(self, n):
        return self.trans.kth(self.scan.class_index(n))

    def report(self):
        inv = rca_invariants(self.beta.map)
        if inv.rank.is_inf:
            img = self.trans
        else:
            img = EPSet.finite(self.trans.kth(i) for i in range(inv.rank.value))
        return exact_report(img.complement().card(), inv.c, inv.k, inv.rank, img)


@register
class DualDelta(Construction):
    """On im α: i ↦ β(least n with γα(n) = i). The p-th point outside im α is
    glued to the p-th point of im α, so im α is a transversal of ker δ."""

    name = "w_dual_delta"

    def __init__(self, alpha, beta):
        self.a = _lazy_map(alpha)
        self.b = _lazy_map(beta)
        self.section, self.img = rca_section(self.a)
        self.outside = self.img.complement()
        self.trans = transversal(self.a)
        self.scan = kernel_scan(beta)

    def _on_image(self, i):
        cid = self.trans.rank(self.section(i))
        return self.b(self.scan.representative(cid))

    def __call__(self, n):
        if n in self.img:
            return self._on_image(n)
        return self._on_image(self.img.kth(self.outside.rank(n)))

    def report(self):
        ia, ib = rca_invariants(self.a), rca_invariants(self.b)
        return exact_report(ib.d, ia.d, ZERO, INF, ib.image)


# ---------------------------------------------------------------- C_p

def w_cp(alpha: Term, beta: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """β = γαδ with γ, δ ∉ C_p, for α, β ∈ C_p."""
    _need(alpha, "alpha", Cp=Tri.YES)
    _need(beta, "beta", Cp=Tri.YES)
    if k_set(alpha) is None:
        raise UnsupportedStructure("K(alpha) is not decidable for this term shape")
    gamma = Lazy.of("w_cp_gamma", alpha=alpha, beta=beta)
    delta = Lazy.of("w_cp_delta", alpha=alpha, beta=beta)
    return certify("w_cp", [("gamma", gamma), ("delta", delta)], compose(gamma, alpha, delta), beta,
                   "compose(compose(gamma, alpha), delta) = beta",
                   [("gamma", "Cp", Tri.NO), ("delta", "Cp", Tri.NO)], W)


@register
class CpGamma(Construction):
    """n in the k-th class of β, t-th member of it ↦ t-th member of α⁻¹(κ_k),
    κ_k the k-th point of K(α). Injective."""

    name = "w_cp_gamma"

    def __init__(self, alpha, beta):
        self.alpha = alpha
        self.K = k_set(alpha)
        self.scan = kernel_scan(beta)

    def __call__(self, n):
        cid = self.scan.class_index(n)
        return fiber_member(self.alpha, self.K.kth(cid), self.scan.position(n))

    def report(self):
        return tighten(InvariantReport(Bounds(ZERO, INF), Bounds.exact(ZERO), Bounds.exact(ZERO),
                                       Bounds.exact(INF), None, Tri.NO, "asserted"))


@register
class CpDelta(Construction):
    """κ_k ↦ β(first member of the k-th class of β); everything off K(α) ↦ 0."""

    name = "w_cp_delta"

    def __init__(self, alpha, beta):
        self.beta = beta
        self.K = k_set(alpha)
        self.scan = kernel_scan(beta)
        self.ev = evaluator(beta)

    def __call__(self, n):
        if n not in self.K:
            return 0
        return self.ev(self.scan.representative(self.K.rank(n)))

    def report(self):
        rb = term_invariants(self.beta)
        rest = self.K.complement().card()
        if rest == ZERO:
            return tighten(InvariantReport(rb.d, Bounds.exact(ZERO), Bounds.exact(ZERO),
                                           Bounds.exact(INF), rb.image, Tri.NO))
        lo_d = rb.d.lo if rb.d.lo.is_inf or rb.d.lo == ZERO else Fin(rb.d.lo.value - 1)
        lo_c = rest if rest.is_inf else Fin(rest.value - 1)
        return tighten(InvariantReport(
            Bounds(lo_d, rb.d.hi), Bounds(lo_c, rest), Bounds.exact(Fin(1) if rest.is_inf else ZERO),
            Bounds.exact(INF), None, Tri.NO))


# ---------------------------------------------------------------- ⟨C_p⟩

def _cp_square_parts(a: RcaMap):
    inv = rca_invariants(a)
    r0 = next(r for r, t in enumerate(a.tails) if isinstance(t, Const))
    v0 = a.tails[r0].b
    cls = fiber(a, v0)
    return v0, cls, cls.complement()


def cp_square(alpha: Term, W: int = DEFAULT_WINDOW) -> WitnessCertificate:
    """α = β₁β₂ with β₁, β₂ ∈ C_p, for α with an infinite kernel class."""
    a = _rca(alpha, "alpha")
    if not rca_invariants(a).has_infinite_kernel_class:
        raise NoInfiniteClass("alpha has no infinite kernel class", "alpha", "CpGenerated")
    b1 = Lazy.of("cp_square_left", alpha=Rca(a))
    b2 = Lazy.of("cp_square_right", alpha=Rca(a))
    return certify("cp_square", [("beta1", b1), ("beta2", b2)], Compose(b1, b2), alpha,
                   "compose(beta1, beta2) = alpha", [("beta1", "Cp", Tri.YES), ("beta2", "Cp", Tri.YES)], W)


@register
class CpSquareLeft(Construction):
    """j-th point of the infinite class ↦ π(2·column(j), 0);
    j-th point of its complement ↦ π(2j, 1)."""

    name = "cp_square_left"

    def __init__(self, alpha):
        self.a = _lazy_map(alpha)
        self.v0, self.cls, self.rest = _cp_square_parts(self.a)

    def __call__(self, n):
        if n in self.cls:
            return pair(2 * column(self.cls.rank(n)), 0)
        return pair(2 * self.rest.rank(n), 1)

    def report(self):
        return exact_report(INF, INF, INF, INF)


@register
class CpSquareRight(Construction):
    """π(2k, 0) ↦ v₀, π(2j, 1) ↦ α(j-th point off the class), π(2k+1, j) ↦ k,
    everything else ↦ v₀."""

    name = "cp_square_right"

    def __init__(self, alpha):
        self.a = _lazy_map(alpha)
        self.v0, self.cls, self.rest = _cp_square_parts(self.a)
        self.rest_size = self.rest.card()

    def __call__(self, n):
        i, j = unpair(n)
        if i % 2:
            return i // 2
        if j == 1 and Fin(i // 2) < self.rest_size:
            return self.a(self.rest.kth(i // 2))
        return self.v0

    def report(self):
        return exact_report(ZERO, INF, INF, INF, EPSet.naturals())


WITNESSES = {
    "w_inj": w_inj,
    "w_sur": w_sur,
    "w_cp": w_cp,
    "w_dual": w_dual,
    "w_sym_from_inj": w_sym_from_inj,
    "w_left_gen_fi": w_left_gen_fi,
    "w_right_gen": w_right_gen,
    "cp_square": cp_square,
}
