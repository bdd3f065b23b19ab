"""Scalar profile functions for the twisted open book model.

Two families of profiles are built here:

* twist profiles: the angle function ``g`` of a k-fold twist of the
  cotangent bundle of a sphere (monotone ramp from ``k*pi`` at 0 to a
  linear drift ``eps*s`` past the plateau), together with the derived
  primitives ``h_k`` and ``h~_k`` that enter the mapping-torus contact
  form;
* binding profiles: the pair ``(h1, h2)`` defining the contact form
  ``h1(r)*lambda + h2(r)*dphi`` on a neighborhood of the binding, with
  the contact condition ``detH/r != 0`` where ``detH = h1*h2' - h2*h1'``.

All shipped shapes have closed-form derivatives up to order two; the
defining integrals of ``h_k`` and ``h~_k`` are evaluated in closed form
with adaptive Gauss-Kronrod quadrature kept as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "ProfileError",
    "SmoothProfile",
    "TwistProfile",
    "BindingProfile",
    "PullbackReport",
    "build_twist_profile",
    "build_binding_profile",
    "default_twist_profile",
    "default_binding_profile",
    "matched_binding_profile",
    "default_pair",
    "matched_pair",
    "pullback_consistency_check",
    "twist_table",
    "binding_table",
]

# Angle-convention factor between the polar angle on the binding disk
# (period 2*pi) and the mapping-torus coordinate (period 1).
PHI_PERIOD_SCALE = 2.0 * math.pi


class ProfileError(ValueError):
    """Raised when a requested profile violates a build invariant."""


# ----------------------------------------------------------------------
# generic scalar profile with derivatives
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothProfile:
    """A scalar function on a closed interval with first and second
    derivatives evaluable everywhere on it.

    ``breaks`` lists interior junction radii of piecewise definitions;
    the finite-difference self-check skips stencils that straddle them.
    """

    lo: float
    hi: float
    value: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]
    kind: str = "closed-form piecewise"
    breaks: tuple = ()

    def __call__(self, x):
        return self.value(x)

    def check_derivative_consistency(self, n=200, h=1e-5, rtol=1e-6, rng=None):
        """Max relative error of d1 against a central difference of value.

        Sample points are interior and kept clear of junctions so the
        stencil never crosses a derivative discontinuity.
        """
        if rng is None:
            rng = np.random.default_rng(0)
        span = self.hi - self.lo
        pts = self.lo + (0.02 + 0.96 * rng.random(n)) * span
        worst = 0.0
        scale = max(abs(self.d1(x)) for x in np.linspace(self.lo + 0.01 * span,
                                                         self.hi - 0.01 * span, 101))
        scale = max(scale, 1e-12)
        for x in pts:
            if any(abs(x - b) < 4 * h for b in self.breaks):
                continue
            if x - h < self.lo or x + h > self.hi:
                continue
            fd = (self.value(x + h) - self.value(x - h)) / (2 * h)
            err = abs(fd - self.d1(x)) / max(abs(self.d1(x)), scale)
            worst = max(worst, err)
        if worst > rtol:
            raise ProfileError(
                f"profile derivative self-check failed: rel err {worst:.3e} > {rtol:.1e}")
        return worst


# ----------------------------------------------------------------------
# twist ramp shapes
# ----------------------------------------------------------------------
# A ramp is a function c on [0, 1] with c(0) = 1, c(1) = 0, monotone
# decreasing, c'(0) = c'(1) = 0.  The twist angle is
#   g(s) = k*pi*c(s / p_plateau) + eps*s      (c == 0 past the plateau).
# Cint is the exact antiderivative of c with Cint(0) = 0.

def _cos_ramp():
    def c(x):
        return 0.5 * (1.0 + math.cos(math.pi * x))

    def c1(x):
        return -0.5 * math.pi * math.sin(math.pi * x)

    def c2(x):
        return -0.5 * math.pi ** 2 * math.cos(math.pi * x)

    def Cint(x):
        return 0.5 * x + math.sin(math.pi * x) / (2.0 * math.pi)

    return c, c1, c2, Cint


def _cos2_ramp():
    # ((1 + cos(pi x))/2)^2 = 3/8 + cos(pi x)/2 + cos(2 pi x)/8.
    # C2 at the plateau end: c'' (1) = 0, so g is C2 across the junction.
    def c(x):
        return (0.5 * (1.0 + math.cos(math.pi * x))) ** 2

    def c1(x):
        return -0.5 * math.pi * (1.0 + math.cos(math.pi * x)) * math.sin(math.pi * x)

    def c2(x):
        return -0.5 * math.pi ** 2 * (math.cos(math.pi * x) + math.cos(2.0 * math.pi * x))

    def Cint(x):
        return (3.0 * x / 8.0 + math.sin(math.pi * x) / (2.0 * math.pi)
                + math.sin(2.0 * math.pi * x) / (16.0 * math.pi))

    return c, c1, c2, Cint


TWIST_SHAPES = {"cos": _cos_ramp, "cos2": _cos2_ramp}


@dataclass(frozen=True)
class TwistProfile:
    """Radial twist data of a k-fold twist with geodesic drift eps.

    ``g`` is the modified angle function (``g(0) = k*pi`` exactly),
    ``f = g - k*pi``, ``hk = 1 + int_0^s sigma g'(sigma) d sigma`` and
    ``htilde = 1 - int_0^s g`` are the primitives entering the two
    mapping-torus contact forms.  For ``k < 0`` the unique zero of ``g``
    is ``p0``.
    """

    k: int
    eps: float
    p_plateau: float
    s_max: float
    shape: str
    g: SmoothProfile
    f: SmoothProfile
    hk: SmoothProfile
    htilde: SmoothProfile
    p0: float | None

    # -- closed-form integral of g, used by hk/htilde ------------------
    def int_g(self, s: float) -> float:
        """Exact antiderivative: int_0^s g."""
        c, c1, c2, Cint = TWIST_SHAPES[self.shape]()
        pc = self.p_plateau
        x = min(s, pc) / pc
        return self.k * math.pi * pc * Cint(x) + 0.5 * self.eps * s * s

    def hk_by_quadrature(self, s: float, tol=1e-12) -> float:
        """Independent Gauss-Kronrod evaluation of 1 + int_0^s sigma g'."""
        val, _ = integrate.quad(lambda u: u * self.g.d1(u), 0.0, s,
                                epsabs=tol, epsrel=tol, limit=200)
        return 1.0 + val

    def htilde_by_quadrature(self, s: float, tol=1e-12) -> float:
        """Independent Gauss-Kronrod evaluation of 1 - int_0^s g."""
        val, _ = integrate.quad(self.g.value, 0.0, s,
                                epsabs=tol, epsrel=tol, limit=200)
        return 1.0 - val


def build_twist_profile(k: int, eps: float, p_plateau: float,
                        shape: dict | str | None = None,
                        s_max: float = 1.0) -> TwistProfile:
    """Construct a twist profile and validate its invariants.

    Rejects ``k == 0`` (no twist), ``eps == 0`` for ``k < 0`` (the zero
    set of the plateau would not be isolated) and ramps that do not
    approach the plateau monotonically.
    """
    if k == 0:
        raise ProfileError("k = 0 gives no twist")
    if not (eps > 0.0):
        raise ProfileError("eps must be positive (eps = 0 leaves a flat zero set)")
    if not (0.0 < p_plateau < 1.0):
        raise ProfileError("p_plateau must lie in (0, 1)")
    if s_max < p_plateau:
        raise ProfileError("domain must contain the plateau point")

    if shape is None:
        shape = {"name": "cos2"}
    if isinstance(shape, str):
        shape = {"name": shape}
    name = shape.get("name", "cos2")
    if name not in TWIST_SHAPES:
        raise ProfileError(f"unknown twist shape {name!r}")
    c, c1, c2, Cint = TWIST_SHAPES[name]()

    # The ramp must be monotone so the angle approaches the plateau
    # without overshoot; checked on a dense grid.
    xs = np.linspace(0.0, 1.0, 513)
    if any(c1(x) > 1e-12 for x in xs):
        raise ProfileError("ramp is not monotone decreasing")

    pc = p_plateau
    kpi = k * math.pi

    def g_val(s):
        ramp = c(s / pc) if s < pc else 0.0
        return kpi * ramp + eps * s

    def g_d1(s):
        ramp = c1(s / pc) / pc if s < pc else 0.0
        return kpi * ramp + eps

    def g_d2(s):
        ramp = c2(s / pc) / pc ** 2 if s < pc else 0.0
        return kpi * ramp

    g = SmoothProfile(0.0, s_max, g_val, g_d1, g_d2, breaks=(pc,))
    f = SmoothProfile(0.0, s_max, lambda s: g_val(s) - kpi, g_d1, g_d2, breaks=(pc,))

    def int_g(s):
        x = min(s, pc) / pc
        return kpi * pc * Cint(x) + 0.5 * eps * s * s

    # hk = 1 + int sigma g' = 1 + s g(s) - int g   (integration by parts)
    def hk_val(s):
        return 1.0 + s * g_val(s) - int_g(s)

    hk = SmoothProfile(0.0, s_max, hk_val,
                       lambda s: s * g_d1(s),
                       lambda s: g_d1(s) + s * g_d2(s),
                       breaks=(pc,))
    htilde = SmoothProfile(0.0, s_max, lambda s: 1.0 - int_g(s),
                           lambda s: -g_val(s),
                           lambda s: -g_d1(s),
                           breaks=(pc,))

    if abs(g_val(0.0) - kpi) > 1e-12:
        raise ProfileError("g(0) != k*pi")
    if abs(hk_val(0.0) - 1.0) > 1e-15:
        raise ProfileError("hk(0) != 1")

    p0 = None
    if k < 0:
        # g rises from k*pi < 0 to eps*s > 0: bracket by scan, bisect,
        # then Newton-polish to |g(p0)| <= 1e-12.
        scan = np.linspace(1e-9, s_max, 1001)
        vals = np.array([g_val(s) for s in scan])
        idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
        if len(idx) != 1:
            raise ProfileError(f"expected one sign change of g, found {len(idx)}")
        a, b = scan[idx[0]], scan[idx[0] + 1]
        p0 = optimize.brentq(g_val, a, b, xtol=1e-15)
        for _ in range(4):
            p0 = p0 - g_val(p0) / g_d1(p0)
        if abs(g_val(p0)) > 1e-12:
            raise ProfileError(f"root polish failed: |g(p0)| = {abs(g_val(p0)):.2e}")
        if g_d1(p0) <= 0.0:
            raise ProfileError("g'(p0) <= 0 at the principal zero")
    else:
        vals = np.array([g_val(s) for s in np.linspace(0.0, s_max, 2001)])
        if vals.min() <= 0.0:
            raise ProfileError("k > 0 twist developed a zero; reduce p_plateau or eps")

    # hk must stay positive on [0, 1] (and the whole domain we ship).
    hk_min = min(hk_val(s) for s in np.linspace(0.0, s_max, 2001))
    if hk_min <= 0.0:
        raise ProfileError(f"hk is not positive on the domain (min {hk_min:.3e})")

    return TwistProfile(k=k, eps=eps, p_plateau=pc, s_max=s_max, shape=name,
                        g=g, f=f, hk=hk, htilde=htilde, p0=p0)


# ----------------------------------------------------------------------
# binding profiles
# ----------------------------------------------------------------------

def _quintic_hermite(x0, x1, v0, d0, s0, v1, d1, s1):
    """Quintic on [x0, x1] matching value/1st/2nd derivative at both ends."""
    A = np.zeros((6, 6))
    b = np.array([v0, d0, s0, v1, d1, s1], dtype=float)
    for cond, (x, order) in enumerate([(x0, 0), (x0, 1), (x0, 2),
                                       (x1, 0), (x1, 1), (x1, 2)]):
        for j in range(6):
            if order == 0:
                A[cond, j] = x ** j
            elif order == 1:
                A[cond, j] = j * x ** (j - 1) if j >= 1 else 0.0
            else:
                A[cond, j] = j * (j - 1) * x ** (j - 2) if j >= 2 else 0.0
    coef = np.linalg.solve(A, b)
    p = np.polynomial.Polynomial(coef)
    return p, p.deriv(1), p.deriv(2)


class _Piecewise:
    """Ordered list of (upper_edge, value, d1, d2) pieces."""

    def __init__(self, pieces):
        self.pieces = pieces

    def _find(self, x):
        for edge, v, d1, d2 in self.pieces:
            if x <= edge:
                return v, d1, d2
        return self.pieces[-1][1], self.pieces[-1][2], self.pieces[-1][3]

    def value(self, x):
        return float(self._find(x)[0](x))

    def d1(self, x):
        return float(self._find(x)[1](x))

    def d2(self, x):
        return float(self._find(x)[2](x))


@dataclass(frozen=True)
class BindingProfile:
    """The pair (h1, h2) defining the contact form near the binding.

    ``r0`` is the radius where h2 attains its maximum (h2'(r0) = 0);
    the closed orbit family there is the one every finite-energy plane
    of the model is asymptotic to.  ``detH = h1 h2' - h2 h1'`` and the
    contact condition is that detH/r extends positively over r = 0.
    """

    h1: SmoothProfile
    h2: SmoothProfile
    r0: float
    r_max: float
    quadratic_core: bool
    core_end: float
    collar: tuple | None = None
    core_scale: float = 1.0
    shape: str = "fig2"

    # -- derived evaluators --------------------------------------------
    def detH(self, r: float) -> float:
        return self.h1(r) * self.h2.d1(r) - self.h2(r) * self.h1.d1(r)

    def detH_d1(self, r: float) -> float:
        # (h1 h2' - h2 h1')' = h1 h2'' - h2 h1''
        return self.h1(r) * self.h2.d2(r) - self.h2(r) * self.h1.d2(r)

    def detH_over_r(self, r: float) -> float:
        if r == 0.0:
            # detH/r -> h2''(0) h1(0) near a quadratic core
            return self.h1(0.0) * self.h2.d2(0.0)
        return self.detH(r) / r

    def min_detH_over_r(self, n: int = 10_000):
        """Grid minimum of detH/r on (0, r_max]; the contact certificate."""
        rs = np.linspace(self.r_max / n, self.r_max, n)
        vals = np.array([self.detH_over_r(r) for r in rs])
        i = int(np.argmin(vals))
        return float(vals[i]), float(rs[i])


def _build_fig2(r0, r_max, shape) -> BindingProfile:
    """Default hump shape: exact quadratic core, quintic rise to a peak
    at r0, and a gentle saturating tail.

    The peak value is normally tied to a twist profile so the closed
    orbit at r0 carries the action of the principal twist level:
    ``2*pi*h2(r0) = hk(p0)``.
    """
    tp = shape.get("twist")
    if "peak" in shape:
        H = float(shape["peak"])
    elif tp is not None:
        if tp.p0 is None:
            raise ProfileError("twist has no principal zero; cannot tie the peak")
        H = tp.hk(tp.p0) / PHI_PERIOD_SCALE
    else:
        raise ProfileError("fig2 shape needs a twist profile or explicit peak")
    kappa = float(shape.get("kappa", 1.0))
    w = float(shape.get("tail_width", 0.12))
    if kappa <= 0.0 or w <= 0.0:
        raise ProfileError("kappa and tail_width must be positive")

    rA = r0 / 4.0
    if H <= rA * rA:
        raise ProfileError(f"peak {H:.4f} below the quadratic core at r0/4")

    # rise piece via a normalized quintic B on [0,1], x = (r0 - r)/L
    L = r0 - rA
    Delta = H - rA * rA
    B, B1, B2 = _quintic_hermite(0.0, 1.0,
                                 0.0, 0.0, kappa * L * L / Delta,
                                 1.0, 2.0 * rA * L / Delta, -2.0 * L * L / Delta)
    xs = np.linspace(0.0, 1.0, 513)
    if np.any(B1(xs) < -1e-10):
        raise ProfileError("rise piece is not monotone; adjust kappa or r0")

    def rise_v(r):
        return H - Delta * B((r0 - r) / L)

    def rise_d1(r):
        return (Delta / L) * B1((r0 - r) / L)

    def rise_d2(r):
        return -(Delta / L ** 2) * B2((r0 - r) / L)

    # tail: h2 = H - (kappa w^2 / 2) tanh((r - r0)/w)^2, so h2''(r0) = -kappa
    def tail_v(r):
        return H - 0.5 * kappa * w * w * math.tanh((r - r0) / w) ** 2

    def tail_d1(r):
        u = (r - r0) / w
        return -kappa * w * math.tanh(u) / math.cosh(u) ** 2

    def tail_d2(r):
        u = (r - r0) / w
        th, ch = math.tanh(u), math.cosh(u)
        return -kappa * (1.0 / ch ** 4 - 2.0 * th ** 2 / ch ** 2)

    h2pw = _Piecewise([
        (rA, lambda r: r * r, lambda r: 2.0 * r, lambda r: 2.0),
        (r0, rise_v, rise_d1, rise_d2),
        (r_max, tail_v, tail_d1, tail_d2),
    ])
    h2 = SmoothProfile(0.0, r_max, h2pw.value, h2pw.d1, h2pw.d2, breaks=(rA, r0))
    h1 = SmoothProfile(0.0, r_max, lambda r: 1.0 - r * r,
                       lambda r: -2.0 * r, lambda r: -2.0)
    return BindingProfile(h1=h1, h2=h2, r0=r0, r_max=r_max,
                          quadratic_core=True, core_end=rA, shape="fig2")


def _build_collar(r0, r_max, shape) -> BindingProfile:
    """Collar-matched shape: past the transition radius the pair is the
    exact pullback of the mapping-torus form, h1 = 1/r and
    h2 = htilde(1/r)/(2*pi), so r0 = 1/p0.  The core is a scaled
    quadratic (the quadratic_core flag is off).

    The core radius and scale of the interpolation are tuned
    automatically: candidates are tried in a fixed ladder and the first
    whose contact certificate holds on the grid is kept.
    """
    tp = shape.get("twist")
    if tp is None or tp.p0 is None:
        raise ProfileError("collar shape needs a twist profile with a principal zero")
    if abs(r0 - 1.0 / tp.p0) > 1e-9:
        raise ProfileError("collar shape requires r0 = 1/p0 of the twist")
    p_cap = float(shape.get("p_cap", min(0.999, 1.3 * tp.p0)))
    if not (tp.p0 < p_cap <= tp.s_max):
        raise ProfileError("p_cap must lie in (p0, s_max]")
    if 1.0 / r_max >= tp.p0:
        raise ProfileError("r_max too small: collar must contain r0 = 1/p0")
    r_c = 1.0 / p_cap

    sc = PHI_PERIOD_SCALE

    # collar formulas and their r-derivatives (s = 1/r)
    def c_h1(r):
        return 1.0 / r

    def c_h1d(r):
        return -1.0 / r ** 2

    def c_h1dd(r):
        return 2.0 / r ** 3

    def c_h2(r):
        s = 1.0 / r
        return tp.htilde(s) / sc

    def c_h2d(r):
        s = 1.0 / r
        return tp.g(s) * s * s / sc

    def c_h2dd(r):
        s = 1.0 / r
        return -(tp.g.d1(s) * s ** 4 + 2.0 * s ** 3 * tp.g(s)) / sc

    H_c = c_h2(r_c)
    if "core_end" in shape:
        rB_ladder = [float(shape["core_end"])]
    else:
        rB_ladder = [f * min(1.0, r_c) for f in (0.5, 0.35, 0.25, 0.15)]
    if "core_scale" in shape:
        c2_ladder = [float(shape["core_scale"])]
    else:
        c2_ladder = [0.3, 0.15, 0.075, 0.04]

    last_err = None
    for rB in rB_ladder:
        if not (0.0 < rB < r_c):
            continue
        for c2 in c2_ladder:
            if c2 * rB * rB >= 0.8 * H_c:
                continue  # scaled core would crowd the collar curve
            cand = _assemble_collar(tp, r0, r_max, r_c, rB, c2,
                                    c_h1, c_h1d, c_h1dd, c_h2, c_h2d, c_h2dd)
            ok, err = _collar_grid_check(cand)
            if ok:
                return cand
            last_err = err
    raise ProfileError(
        "collar shape: no admissible core parameters found"
        + (f" (last failure: {last_err})" if last_err else ""))


def _assemble_collar(tp, r0, r_max, r_c, rB, c2,
                     c_h1, c_h1d, c_h1dd, c_h2, c_h2d, c_h2dd):
    h1r, h1r1, h1r2 = _quintic_hermite(rB, r_c,
                                       1.0 - rB * rB, -2.0 * rB, -2.0,
                                       c_h1(r_c), c_h1d(r_c), c_h1dd(r_c))
    h2r, h2r1, h2r2 = _quintic_hermite(rB, r_c,
                                       c2 * rB * rB, 2.0 * c2 * rB, 2.0 * c2,
                                       c_h2(r_c), c_h2d(r_c), c_h2dd(r_c))
    h1pw = _Piecewise([
        (rB, lambda r: 1.0 - r * r, lambda r: -2.0 * r, lambda r: -2.0),
        (r_c, h1r, h1r1, h1r2),
        (r_max, c_h1, c_h1d, c_h1dd),
    ])
    h2pw = _Piecewise([
        (rB, lambda r: c2 * r * r, lambda r: 2.0 * c2 * r, lambda r: 2.0 * c2),
        (r_c, h2r, h2r1, h2r2),
        (r_max, c_h2, c_h2d, c_h2dd),
    ])
    breaks = (rB, r_c, 1.0 / tp.p_plateau) if r_max > 1.0 / tp.p_plateau \
        else (rB, r_c)
    h1 = SmoothProfile(0.0, r_max, h1pw.value, h1pw.d1, h1pw.d2, breaks=breaks)
    h2 = SmoothProfile(0.0, r_max, h2pw.value, h2pw.d1, h2pw.d2, breaks=breaks)
    return BindingProfile(h1=h1, h2=h2, r0=r0, r_max=r_max,
                          quadratic_core=False, core_end=rB,
                          collar=(r_c, r_max), core_scale=c2, shape="collar")


def _collar_grid_check(bp: BindingProfile):
    rs = np.linspace(bp.r_max / 1024, bp.r_max, 1024)
    for r in rs:
        if bp.h1(r) <= 0.0:
            return False, f"h1 <= 0 at r = {r:.4f}"
        if bp.detH_over_r(r) <= 0.0:
            return False, f"detH/r <= 0 at r = {r:.4f}"
        if bp.h2(r) > bp.h2(bp.r0) + 1e-12:
            return False, f"h2 exceeds the r0 peak at r = {r:.4f}"
    return True, None


def build_binding_profile(r0: float, r_max: float, shape: dict) -> BindingProfile:
    """Build a binding profile and verify its invariants.

    shape["name"] selects the construction: "fig2" (default hump tied
    to a twist), "collar" (exact pullback of the mapping-torus form
    past the transition radius) or "custom" (caller supplies the two
    SmoothProfiles; used for counterexamples and oracles).
    """
    if not (0.0 < r0 < r_max):
        raise ProfileError("need 0 < r0 < r_max")
    name = shape.get("name", "fig2")
    if name == "fig2":
        bp = _build_fig2(r0, r_max, shape)
    elif name == "collar":
        bp = _build_collar(r0, r_max, shape)
    elif name == "custom":
        bp = BindingProfile(h1=shape["h1"], h2=shape["h2"], r0=r0, r_max=r_max,
                            quadratic_core=bool(shape.get("quadratic_core", False)),
                            core_end=float(shape.get("core_end", 0.0)),
                            shape="custom")
    else:
        raise ProfileError(f"unknown binding shape {name!r}")

    # invariant checks ------------------------------------------------
    rs = np.linspace(r_max / 2048, r_max, 2048)
    for r in rs:
        if abs(bp.h1(r)) < 1e-12:
            raise ProfileError(f"[{name}] h1 vanishes at r = {r:.6f}")
    vals = np.array([bp.detH_over_r(r) for r in rs])
    if vals.min() <= 0.0:
        bad = float(rs[int(np.argmin(vals))])
        raise ProfileError(
            f"[{name}] contact condition fails: detH/r <= 0 at r = {bad:.6f}")
    if abs(bp.h2.d1(bp.r0)) > 1e-10:
        raise ProfileError(f"[{name}] h2'(r0) = {bp.h2.d1(bp.r0):.3e} != 0")
    h2max = max(bp.h2(r) for r in rs)
    if h2max > bp.h2(bp.r0) + 1e-12:
        raise ProfileError(f"[{name}] h2 does not attain its maximum at r0")
    return bp


# ----------------------------------------------------------------------
# shipped defaults
# ----------------------------------------------------------------------

def default_twist_profile() -> TwistProfile:
    return build_twist_profile(k=-1, eps=0.05, p_plateau=0.75, shape="cos2")


def default_binding_profile(tp: TwistProfile | None = None) -> BindingProfile:
    if tp is None:
        tp = default_twist_profile()
    return build_binding_profile(0.55, 0.75, {"name": "fig2", "twist": tp,
                                              "kappa": 1.0, "tail_width": 0.12})


def matched_binding_profile(tp: TwistProfile, r_max: float | None = None,
                            p_cap: float | None = None) -> BindingProfile:
    if tp.p0 is None:
        raise ProfileError("matched profile needs k < 0")
    r0 = 1.0 / tp.p0
    if r_max is None:
        r_max = 2.0 / tp.p0
    shape = {"name": "collar", "twist": tp}
    if p_cap is not None:
        shape["p_cap"] = p_cap
    return build_binding_profile(r0, r_max, shape)


def default_pair():
    tp = default_twist_profile()
    return tp, default_binding_profile(tp)


def matched_pair():
    tp = default_twist_profile()
    return tp, matched_binding_profile(tp)


# ----------------------------------------------------------------------
# collar pullback consistency
# ----------------------------------------------------------------------

@dataclass
class PullbackReport:
    collar: tuple
    phi_period_scale: float
    max_mismatch: float
    worst_radius: float
    max_mismatch_h1: float
    max_mismatch_h2: float
    passed: bool
    n_samples: int


def pullback_consistency_check(tp: TwistProfile, bp: BindingProfile,
                               collar: tuple, n: int = 512,
                               tol: float = 1e-8) -> PullbackReport:
    """Compare (h1, h2) against the pullback of the mapping-torus form
    under (q, p, r, phi) -> (q, p/r, phi / (2*pi)).

    On a matching collar this forces h1(r) = 1/r and
    h2(r) = htilde(1/r) / (2*pi); the 2*pi is the recorded conversion
    between the disk angle and the unit-period torus coordinate.
    """
    lo, hi = collar
    if not (0.0 < lo <= hi <= bp.r_max):
        raise ProfileError("collar must be a subinterval of (0, r_max]")
    rs = np.linspace(lo, hi, n) if hi > lo else np.array([lo])
    worst = -1.0
    worst_r = lo
    w1 = w2 = 0.0
    for r in rs:
        s = 1.0 / r
        if s > tp.s_max:
            raise ProfileError(f"collar radius {r:.4f} maps outside the twist domain")
        m1 = abs(bp.h1(r) - 1.0 / r)
        m2 = abs(bp.h2(r) - tp.htilde(s) / PHI_PERIOD_SCALE)
        w1 = max(w1, m1)
        w2 = max(w2, m2)
        m = max(m1, m2)
        if m > worst:
            worst, worst_r = m, float(r)
    return PullbackReport(collar=(float(lo), float(hi)),
                          phi_period_scale=PHI_PERIOD_SCALE,
                          max_mismatch=worst, worst_radius=worst_r,
                          max_mismatch_h1=w1, max_mismatch_h2=w2,
                          passed=worst <= tol, n_samples=len(rs))


# ----------------------------------------------------------------------
# CSV dump tables
# ----------------------------------------------------------------------

def twist_table(tp: TwistProfile, n: int = 256):
    header = ["x", "g", "g_prime", "h_k", "h_tilde_k"]
    rows = []
    for s in np.linspace(0.0, tp.s_max, n):
        rows.append([s, tp.g(s), tp.g.d1(s), tp.hk(s), tp.htilde(s)])
    return header, rows


def binding_table(bp: BindingProfile, n: int = 256):
    header = ["r", "h1", "h1_prime", "h2", "h2_prime", "detH"]
    rows = []
    for r in np.linspace(0.0, bp.r_max, n):
        rows.append([r, bp.h1(r), bp.h1.d1(r), bp.h2(r), bp.h2.d1(r), bp.detH(r)])
    return header, rows
