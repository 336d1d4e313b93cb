"""Half-integral-weight lifts from Brandt module eigenvectors.

For a class set with a ternary form attached to each class, a module
vector maps to the corresponding combination of theta series.  Within an
eigencomponent the lift is pinned (up to the global sign) by taking the
vector orthogonal to the kernel of the theta map and scaling so the
coefficient sequence is primitive integral with positive leading term.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .brandt import (BrandtSeries, Eigencomponent, isotypical, kernel_basis, phi,
                     primitive_rational_row, psi, rref, solve_in_span)
from .ideals import (ClassSet, LeftIdeal, ModuleVector, chi_sign, class_set, height,
                     suborder_tilde, suborders_sigma, subideals, tilde_class_set)
from .numtheory import kronecker
from .qalg import Order, maximal_order
from .ternary import TernaryForm, ThetaCoeffs, ternary_of_order, theta_coeffs


def level_character(O: Order) -> tuple[int, int]:
    """(level 4*disc/omega_x, character modulus omega_x; modulus 1 = trivial)."""
    d, w = O.disc, O.omega_x
    if (4 * d) % w:
        raise ArithmeticError("omega_x does not divide 4 disc")
    return 4 * d // w, w


def theta_map(v: ModuleVector, forms: list[TernaryForm], bound: int) -> ThetaCoeffs:
    """Linear extension of class |-> theta(form of class) to module vectors."""
    out = ThetaCoeffs(bound, [0] * (bound + 1))
    for c, F in zip(v.coords, forms):
        if c:
            out = out.add(theta_coeffs(F, bound).scaled(c))
    return out


def kernel_theta(cs: ClassSet, forms: list[TernaryForm], start: int = 50,
                 cap: int = 1600) -> list[list[Fraction]]:
    """Exact kernel of the theta map on the module, as primitive rows.

    The coefficient bound doubles until the kernel stabilizes twice.
    """
    B = start
    prev = None
    stable = 0
    while B <= cap:
        mat = [list(theta_coeffs(F, B).coeffs) for F in forms]
        # left kernel of the class-by-coefficient matrix
        ker = kernel_basis([[mat[i][d] for i in range(len(forms))] for d in range(B + 1)])
        ker = [primitive_rational_row(k) for k in ker]
        key = (len(ker), tuple(tuple(k) for k in ker))
        if prev is not None and key == prev:
            stable += 1
            if stable >= 2:
                return [[Fraction(x) for x in k] for k in ker]
        else:
            stable = 0
        prev = key
        B *= 2
    raise ArithmeticError(f"theta kernel did not stabilize below bound {cap}")


@dataclass
class LiftData:
    """A weight-3/2 lift: vector, theta coefficients, and its invariants."""

    label: str
    sigma: int  # +1, -1, or 0 for a level-4p lift
    vector: ModuleVector
    coeffs: ThetaCoeffs
    height: Fraction
    level: int
    character_modulus: int
    zero: bool
    form_combo: dict = field(default_factory=dict)  # TernaryForm -> Fraction

    def coefficient(self, d: int) -> int:
        c = self.coeffs[d]
        if c.denominator != 1:
            raise ArithmeticError(f"non-integral lift coefficient at d={d}")
        return int(c)


def _form_combo(v: ModuleVector, forms: list[TernaryForm]) -> dict:
    combo: dict[TernaryForm, Fraction] = {}
    for c, F in zip(v.coords, forms):
        if c:
            combo[F] = combo.get(F, Fraction(0)) + c
    return {F: c for F, c in combo.items() if c != 0}


def _normalized_lift(label: str, sigma: int, v: ModuleVector, forms: list[TernaryForm],
                     bound: int, level: int, kappa: int) -> LiftData:
    th = theta_map(v, forms, bound)
    content = th.content()
    if content == 0:
        return LiftData(label, sigma, v, th, height(v, v), level, kappa, True,
                        _form_combo(v, forms))
    first = next(c for c in th.coeffs[1:] if c != 0)
    scale = 1 / content if first > 0 else -1 / content
    v = v * scale
    th = th.scaled(scale)
    return LiftData(label, sigma, v, th, height(v, v), level, kappa, False,
                    _form_combo(v, forms))


def _raw_e_sigma(comp: Eigencomponent, forms: list[TernaryForm]):
    """Unnormalized distinguished vector orthogonal to ker theta, or None
    when the whole component maps to zero."""
    W = [list(b.coords) for b in comp.basis]
    k = len(W)
    # kernel of theta restricted to the component, at a stabilized bound
    B = 50
    ker_s = None
    stable = 0
    while stable < 2 and B <= 1600:
        mat = [list(theta_map(comp.basis[t], forms, B).coeffs) for t in range(k)]
        ker_now = kernel_basis([[mat[t][d] for t in range(k)] for d in range(B + 1)])
        key = tuple(tuple(primitive_rational_row(r)) for r in ker_now)
        if ker_s is not None and key == ker_s[0]:
            stable += 1
        else:
            stable = 0
        ker_s = (key, ker_now)
        B *= 2
    if stable < 2:
        raise ArithmeticError("component theta kernel did not stabilize")
    ker_s = ker_s[1]
    if len(ker_s) == k:
        return None
    if k - len(ker_s) != 1:
        raise ArithmeticError(f"theta image of a component has dimension "
                              f"{k - len(ker_s)} > 1")
    cs = comp.class_set
    if ker_s:
        us = cs.unit_orders
        G = [[sum(Fraction(W[s][i]) * W[t][i] * Fraction(us[i], 2) for i in range(len(us)))
              for t in range(k)] for s in range(k)]
        constraints = [[sum(Fraction(kr[t]) * G[t][u] for t in range(k)) for u in range(k)]
                       for kr in ker_s]
        sols = kernel_basis(constraints)
        if len(sols) != 1:
            raise ArithmeticError("orthogonal complement in component not 1-dimensional")
        s = sols[0]
    else:
        s = [Fraction(1)] + [Fraction(0)] * (k - 1)
    coords = [sum(s[t] * Fraction(W[t][i]) for t in range(k)) for i in range(len(cs))]
    return ModuleVector(cs, coords)


def _proportional(v: ModuleVector, w: ModuleVector) -> bool:
    num = den = None
    for a, b in zip(v.coords, w.coords):
        if (a == 0) != (b == 0):
            return False
        if a != 0:
            if num is None:
                num, den = a, b
            elif a * den != b * num:
                return False
    return num is not None


def component_lifts(comp: Eigencomponent, forms_sigma: dict, label: str, bound: int,
                    level: int, kappa: int) -> dict:
    """Both sign-lifts of one component, normalized to primitive integral
    theta coefficients: jointly when the two vectors agree, per sign otherwise."""
    raw = {sg: _raw_e_sigma(comp, forms_sigma[sg]) for sg in (1, -1)}
    out = {}
    joint = (raw[1] is not None and raw[-1] is not None
             and _proportional(raw[1], raw[-1]))
    if joint:
        v = raw[1]
        thp = theta_map(v, forms_sigma[1], bound)
        thm = theta_map(v, forms_sigma[-1], bound)
        from math import gcd as _g
        cp, cm = thp.content(), thm.content()
        content = Fraction(_g(cp.numerator, cm.numerator),
                           (cp.denominator * cm.denominator) //
                           _g(cp.denominator, cm.denominator))
        merged = next(cp_ + cm_ for cp_, cm_ in zip(thp.coeffs[1:], thm.coeffs[1:])
                      if cp_ + cm_ != 0)
        scale = 1 / content if merged > 0 else -1 / content
        v = v * scale
        for sg in (1, -1):
            th = theta_map(v, forms_sigma[sg], bound)
            out[sg] = LiftData(label, sg, v, th, height(v, v), level, kappa,
                               th.is_zero(), _form_combo(v, forms_sigma[sg]))
        return out
    for sg in (1, -1):
        if raw[sg] is None:
            v = comp.basis[0]
            th = theta_map(v, forms_sigma[sg], bound)
            if not th.is_zero():
                raise ArithmeticError("kernel bookkeeping mismatch in zero lift")
            out[sg] = LiftData(label, sg, v, th, height(v, v), level, kappa, True,
                               _form_combo(v, forms_sigma[sg]))
        else:
            out[sg] = _normalized_lift(label, sg, raw[sg], forms_sigma[sg], bound,
                                       level, kappa)
    return out


def gross_lift(comp: Eigencomponent, forms: list[TernaryForm], label: str,
               bound: int, level: int) -> LiftData:
    """Level-4p lift of a one-dimensional component over the maximal order."""
    if comp.dimension != 1:
        raise ArithmeticError("level-p component must be one-dimensional")
    return _normalized_lift(label, 0, comp.basis[0], forms, bound, level, 1)


# ---------------------------------------------------------------------------
# per-level bundle


LABELS = {
    7: {"genuine": "49A"},
    11: {"level_p": "11A", "twist": "121D", "selfdual": "121B", "pair": ("121A", "121C")},
    17: {"level_p": "17A", "twist": "289A"},
    19: {"level_p": "19A", "twist": "361B", "selfdual": "361A"},
}


@dataclass
class LevelData:
    """Everything the verification pipeline needs for one prime level."""

    p: int
    alg: object
    O: Order
    cs: ClassSet
    Ot: Order
    cs_t: ClassSet
    multisets: list
    chis: list[int]
    sigma_orders: dict
    forms_sigma: dict  # sigma -> list[TernaryForm] per tilde class
    forms_max: list
    bs: BrandtSeries
    bs_t: BrandtSeries
    comps_max: list
    comps: list
    lifts: dict  # label -> {sigma: LiftData}
    gross_lifts: dict  # label -> LiftData
    theta_bound: int

    def component(self, label: str) -> Eigencomponent:
        for c in self.comps:
            if c.label == label:
                return c
        raise KeyError(f"no component labeled {label}")

    def labels(self) -> list[str]:
        return [c.label for c in self.comps if c.label]


def _match_subspace(va: list[ModuleVector], vb: list[ModuleVector]) -> bool:
    if len(va) != len(vb):
        return False
    rows = [list(b.coords) for b in vb]
    try:
        for a in va:
            solve_in_span(rows, list(a.coords))
        return True
    except ArithmeticError:
        return False


def build_level(p: int, theta_bound: int = 200, brandt_bound: int = 30,
                probe_count: int = 5) -> LevelData:
    """Assemble orders, class sets, Brandt data, components and lifts."""
    alg, O = maximal_order(p)
    cs = class_set(O, p)
    Ot = suborder_tilde(O, p)
    cs_t, multisets = tilde_class_set(cs, Ot, p)
    chis = [chi_sign(b, p) for b in cs_t.reps]
    subs = suborders_sigma(Ot, O, p)
    sigma_orders = {1: next(o for o, s in subs if s == 1),
                    -1: next(o for o, s in subs if s == -1)}
    forms_sigma = {}
    for sg in (1, -1):
        forms = []
        for b in cs_t.reps:
            ss = subideals(b, sigma_orders[sg], p)
            if len(ss) != p:
                raise ArithmeticError(f"expected {p} subideals, found {len(ss)}")
            ros = {s.right_order.lattice for s in ss}
            if len(ros) != 1:
                raise ArithmeticError("subideals do not share a right order")
            forms.append(ternary_of_order(ss[0].right_order))
        forms_sigma[sg] = forms
    forms_max = [ternary_of_order(a.right_order) for a in cs.reps]

    bs = BrandtSeries.compute(cs, brandt_bound)
    bs_t = BrandtSeries.compute(cs_t, brandt_bound)
    comps_max = isotypical(bs, probe_count)
    comps = isotypical(bs_t, probe_count)
    _assign_labels(p, comps, comps_max, chis)

    level_t, kappa_t = level_character(sigma_orders[1])
    lifts = {}
    for c in comps:
        if not c.label:
            continue
        lifts[c.label] = component_lifts(c, forms_sigma, c.label, theta_bound,
                                         level_t, kappa_t)
    gross = {}
    level_m, kappa_m = level_character(O)
    for c in comps_max:
        if c.rational and not c.is_eisenstein():
            label = LABELS.get(p, {}).get("level_p", f"{p}A")
            gross[label] = gross_lift(c, forms_max, label, theta_bound, level_m)
    level = LevelData(p, alg, O, cs, Ot, cs_t, multisets, chis, sigma_orders,
                      forms_sigma, forms_max, bs, bs_t, comps_max, comps, lifts,
                      gross, theta_bound)
    resolve_pair_labels(level)
    return level


def _assign_labels(p: int, comps: list[Eigencomponent], comps_max: list[Eigencomponent],
                   chis: list[int]):
    """Name the rational cuspidal components by their structural role.

    The level-p component matches the maximal-order eigenvalues; its
    twist is the phi image; a phi-fixed two-dimensional component is the
    self-twist; a swapped pair is told apart by the lift heights.
    """
    names = LABELS.get(p, {})
    cusp_max = [c for c in comps_max if c.rational and not c.is_eisenstein()]
    rational = [c for c in comps if c.rational and not c.is_eisenstein()]

    def phi_image_basis(c):
        return [phi(b, chis) for b in c.basis]

    level_p_comp = None
    for c in rational:
        for cm in cusp_max:
            common = [q for q in c.eigenvalues if q in cm.eigenvalues]
            if common and all(c.eigenvalues[q] == cm.eigenvalues[q] for q in common):
                c.label = names.get("level_p", f"{p}A")
                level_p_comp = c
                break
        if level_p_comp is not None:
            break
    if level_p_comp is not None:
        for c in rational:
            if c.label:
                continue
            if all(c.eigenvalues[q] == kronecker(q, p) * level_p_comp.eigenvalues[q]
                   for q in c.eigenvalues):
                c.label = names.get("twist", f"{p * p}*")
    unnamed = [c for c in rational if not c.label]
    selfdual = [c for c in unnamed if _match_subspace(phi_image_basis(c), c.basis)]
    paired = [c for c in unnamed if c not in selfdual]
    if p == 7:
        if len(selfdual) == 1 and not paired:
            selfdual[0].label = names["genuine"]
            return
        raise ArithmeticError("unexpected component structure at p=7")
    if "selfdual" in names:
        if len(selfdual) != 1:
            raise ArithmeticError(f"expected one self-twist component, got {len(selfdual)}")
        selfdual[0].label = names["selfdual"]
    elif selfdual:
        raise ArithmeticError("unexpected self-twist rational component")
    if "pair" in names:
        if len(paired) != 2 or not _match_subspace(phi_image_basis(paired[0]), paired[1].basis):
            raise ArithmeticError("expected a single twist-swapped pair of components")
        paired[0].label, paired[1].label = names["pair"]
    elif paired:
        raise ArithmeticError("unexpected twist-pair of rational components")


def resolve_pair_labels(level: LevelData):
    """Disambiguate a twist-swapped pair by the lift height pattern: the
    member whose two sign-lifts have distinct heights comes first."""
    names = LABELS.get(level.p, {})
    if "pair" not in names:
        return
    la, lb = names["pair"]
    ha = {sg: level.lifts[la][sg].height for sg in (1, -1)}
    hb = {sg: level.lifts[lb][sg].height for sg in (1, -1)}
    a_uneven = ha[1] != ha[-1]
    b_uneven = hb[1] != hb[-1]
    if a_uneven == b_uneven:
        raise ArithmeticError("height pattern does not separate the twist pair")
    if b_uneven:
        ca, cb = level.component(la), level.component(lb)
        ca.label, cb.label = lb, la
        level.lifts[la], level.lifts[lb] = level.lifts[lb], level.lifts[la]
        for sg in (1, -1):
            level.lifts[la][sg].label = la
            level.lifts[lb][sg].label = lb
