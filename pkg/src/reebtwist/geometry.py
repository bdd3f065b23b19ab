"""Pointwise geometry of the binding model ST*S^{n-1} x D^2 and its
symplectization.

Points carry ambient vectors q, p in R^n constrained by
|q| = |p| = 1, q.p = 0; tangent vectors satisfy the differentiated
constraints.  The module evaluates the contact form
alpha = h1(r) lambda + h2(r) dphi, its Reeb field, the almost complex
structure J extended by J dt = R_alpha, and the rotating symplectic
frames used for index computations on the mapping-torus side.

All computations are done on the ambient components; no charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import BindingProfile, TwistProfile

__all__ = [
    "GeometryError",
    "BindingPoint",
    "SymplPoint",
    "TangentVector",
    "TildeReebData",
    "random_binding_point",
    "random_tangent",
    "alpha_binding",
    "dalpha_binding",
    "dalpha_binding_fd",
    "reeb_field_binding",
    "geo_field_binding",
    "apply_J",
    "reeb_field_tilde",
    "tilde_reeb_data",
    "push_reeb_to_tilde",
    "symplectic_frame",
    "dalpha_tilde",
    "identity_suite",
]

CONSTRAINT_TOL = 1e-10


class GeometryError(ValueError):
    pass


# ----------------------------------------------------------------------
# points and tangent vectors
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BindingPoint:
    """A point of ST*S^{n-1} x D^2: unit orthogonal q, p plus polar (r, phi)."""

    q: np.ndarray
    p: np.ndarray
    r: float
    phi: float

    def __post_init__(self):
        q, p = np.asarray(self.q, float), np.asarray(self.p, float)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        if q.shape != p.shape or q.ndim != 1 or len(q) < 2:
            raise GeometryError("q, p must be equal-length vectors, n >= 2")
        res = max(abs(q @ q - 1.0), abs(p @ p - 1.0), abs(q @ p))
        if res > CONSTRAINT_TOL:
            raise GeometryError(f"point constraint residual {res:.2e}")

    @property
    def n(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class SymplPoint:
    base: BindingPoint
    t: float = 0.0


@dataclass(frozen=True)
class TangentVector:
    """Components (dphi, dq, dp, dr, dt) of a tangent vector at a point."""

    dphi: float
    dq: np.ndarray
    dp: np.ndarray
    dr: float
    dt: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dq", np.asarray(self.dq, float))
        object.__setattr__(self, "dp", np.asarray(self.dp, float))

    def constraint_residual(self, x: BindingPoint) -> float:
        return max(abs(x.q @ self.dq), abs(x.p @ self.dp),
                   abs(x.p @ self.dq + x.q @ self.dp))

    def check_tangency(self, x: BindingPoint, tol=CONSTRAINT_TOL):
        res = self.constraint_residual(x)
        if res > tol:
            raise GeometryError(f"vector not tangent: residual {res:.2e}")

    def scaled(self, c: float) -> "TangentVector":
        return TangentVector(c * self.dphi, c * self.dq, c * self.dp,
                             c * self.dr, c * self.dt)

    def plus(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.dphi + other.dphi, self.dq + other.dq,
                             self.dp + other.dp, self.dr + other.dr,
                             self.dt + other.dt)

    def norm(self) -> float:
        return math.sqrt(self.dphi ** 2 + self.dq @ self.dq + self.dp @ self.dp
                         + self.dr ** 2 + self.dt ** 2)


def random_binding_point(n: int, bp: BindingProfile, rng,
                         r_range: tuple | None = None) -> BindingPoint:
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    p = rng.standard_normal(n)
    p -= (p @ q) * q
    p /= np.linalg.norm(p)
    if r_range is None:
        r_range = (0.05 * bp.r_max, 0.95 * bp.r_max)
    r = rng.uniform(*r_range)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return BindingPoint(q=q, p=p, r=r, phi=phi)


def random_tangent(x: BindingPoint, rng) -> TangentVector:
    """Ambient Gaussian projected onto the constraint tangent space.

    The three constraint normals (q,0), (0,p), (p,q)/sqrt2 in
    (dq, dp)-space are mutually orthogonal at a valid point, so the
    projection is a plain orthogonal one.
    """
    dq = rng.standard_normal(x.n)
    dp = rng.standard_normal(x.n)
    dq -= (dq @ x.q) * x.q
    dp -= (dp @ x.p) * x.p
    mixed = (x.p @ dq + x.q @ dp) / 2.0
    dq -= mixed * x.p
    dp -= mixed * x.q
    return TangentVector(dphi=rng.standard_normal(), dq=dq, dp=dp,
                         dr=rng.standard_normal(), dt=rng.standard_normal())


# ----------------------------------------------------------------------
# contact form, Reeb field, J on the binding model
# ----------------------------------------------------------------------

def alpha_binding(bp: BindingProfile, x: BindingPoint, v: TangentVector) -> float:
    """alpha(v) = h1(r) p.dq + h2(r) dphi."""
    return bp.h1(x.r) * float(x.p @ v.dq) + bp.h2(x.r) * v.dphi


def dalpha_binding(bp: BindingProfile, x: BindingPoint,
                   u: TangentVector, v: TangentVector) -> float:
    """Exact bilinear d(alpha)(u, v) on the ambient components:

    dalpha = h1' dr ^ lambda + h1 dp ^ dq + h2' dr ^ dphi.
    """
    lam_u = float(x.p @ u.dq)
    lam_v = float(x.p @ v.dq)
    term1 = bp.h1.d1(x.r) * (u.dr * lam_v - v.dr * lam_u)
    term2 = bp.h1(x.r) * float(u.dp @ v.dq - v.dp @ u.dq)
    term3 = bp.h2.d1(x.r) * (u.dr * v.dphi - v.dr * u.dphi)
    return term1 + term2 + term3


def _shift_point(x: BindingPoint, v: TangentVector, eps: float):
    # straight-line shift in ambient coordinates; used only inside FD
    # stencils, so the constraint drift O(eps^2) is below the tolerance.
    return (x.q + eps * v.dq, x.p + eps * v.dp, x.r + eps * v.dr,
            x.phi + eps * v.dphi)


def dalpha_binding_fd(bp: BindingProfile, x: BindingPoint,
                      u: TangentVector, v: TangentVector,
                      step: float = 1e-5) -> float:
    """Central-difference cross-check of dalpha along coordinate flows.

    Extends u, v as constant ambient fields; their bracket vanishes, so
    dalpha(u,v) = D_u[alpha(v)] - D_v[alpha(u)].  One Richardson
    refinement (stencil at step and step/2) removes the leading
    quadratic error, which otherwise sits near the target tolerance on
    the strongly curved part of the tail.
    """
    def alpha_at(qq, pp, rr, _phi, w: TangentVector):
        return bp.h1(rr) * float(pp @ w.dq) + bp.h2(rr) * w.dphi

    def central(h):
        au_p = alpha_at(*_shift_point(x, u, h), v)
        au_m = alpha_at(*_shift_point(x, u, -h), v)
        av_p = alpha_at(*_shift_point(x, v, h), u)
        av_m = alpha_at(*_shift_point(x, v, -h), u)
        return (au_p - au_m) / (2 * h) - (av_p - av_m) / (2 * h)

    d1 = central(step)
    d2 = central(step / 2.0)
    return (4.0 * d2 - d1) / 3.0


def reeb_field_binding(bp: BindingProfile, x: BindingPoint) -> TangentVector:
    """R_alpha = (h2' R_lambda - h1' dphi) / detH, R_lambda = p dq - q dp."""
    if not (0.0 <= x.r <= bp.r_max):
        raise GeometryError(f"r = {x.r} outside [0, {bp.r_max}]")
    if x.r == 0.0:
        # r -> 0 limit: h1', h2' ~ h''(0) r (even profiles) and
        # detH ~ (detH/r)(0) r, so both coefficients have finite limits.
        a = bp.h2.d2(0.0) / bp.detH_over_r(0.0)
        b = -bp.h1.d2(0.0) / bp.detH_over_r(0.0)
        return TangentVector(dphi=b, dq=a * x.p, dp=-a * x.q, dr=0.0)
    det = bp.detH(x.r)
    a = bp.h2.d1(x.r) / det
    return TangentVector(dphi=-bp.h1.d1(x.r) / det, dq=a * x.p, dp=-a * x.q, dr=0.0)


def geo_field_binding(bp: BindingProfile, x: BindingPoint) -> TangentVector:
    """J dr = (-h2 R_lambda + h1 dphi) / detH."""
    det = bp.detH(x.r)
    a = -bp.h2(x.r) / det
    return TangentVector(dphi=bp.h1(x.r) / det, dq=a * x.p, dp=-a * x.q, dr=0.0)


def apply_J(bp: BindingProfile, x: SymplPoint, v: TangentVector,
            tol: float = 1e-8) -> TangentVector:
    """Apply the almost complex structure in coordinates (phi,q,p,r,t).

    J dt = R_alpha and J dr is the field above; on the contact plane it
    restricts to the compatible structure inherited from the cotangent
    model.  Requires v tangent at the base point.
    """
    pt = x.base
    res = v.constraint_residual(pt)
    if res > tol:
        raise GeometryError(f"apply_J: vector not tangent (residual {res:.2e})")
    r = pt.r
    h1, h2 = bp.h1(r), bp.h2(r)
    h1d, h2d = bp.h1.d1(r), bp.h2.d1(r)
    det = bp.detH(r)
    q, p = pt.q, pt.p
    dphi = (h1 * v.dr - h1d * v.dt) / det
    dq = (q * float(p @ v.dq) + v.dp - (h2 / det) * p * v.dr
          + (h2d / det) * p * v.dt)
    dp = (-v.dq - p * float(q @ v.dp) + (h2 / det) * q * v.dr
          - (h2d / det) * q * v.dt)
    dr = -h2d * v.dphi - h1d * float(p @ v.dq)
    dt = -h2 * v.dphi - h1 * float(p @ v.dq)
    return TangentVector(dphi=dphi, dq=dq, dp=dp, dr=dr, dt=dt)


# ----------------------------------------------------------------------
# mapping-torus (tilde) model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TildeReebData:
    """Coefficients of the torus Reeb field R = N dphi + g G at level s."""

    s: float
    N: float
    g: float


def tilde_reeb_data(tp: TwistProfile, s: float, tol: float = 1e-12) -> TildeReebData:
    """N = 1/(htilde - s htilde'), g = N htilde'.

    The denominator equals h_k(s) (integration by parts), so it is
    positive for every shipped left twist; a vanishing denominator is a
    genuine singularity of the model and is reported as such.
    """
    if s < 0 or s > tp.s_max:
        raise GeometryError(f"level s = {s} outside twist domain")
    ht = tp.htilde(s)
    htd = tp.htilde.d1(s)
    den = ht - s * htd
    if abs(den) < tol:
        raise GeometryError(f"Reeb denominator vanishes at s = {s:.6f}")
    N = 1.0 / den
    return TildeReebData(s=s, N=N, g=N * htd)


def reeb_field_tilde(tp: TwistProfile, q: np.ndarray, p: np.ndarray):
    """Torus Reeb field at (q, p), |p| = s free.  Returns (data, dphi, dq, dp)."""
    s = float(np.linalg.norm(p))
    data = tilde_reeb_data(tp, s)
    # G = |p| q dp - (1/|p|) p dq
    dq = -data.g * p / s
    dp = data.g * s * q
    return data, data.N, dq, dp


def push_reeb_to_tilde(tp: TwistProfile, bp: BindingProfile, r: float):
    """Push R_alpha at radius r through (q,p,r,phi) -> (q, p/r, phi/2pi)
    and compare with the torus Reeb field at level s = 1/r.

    Returns the max component mismatch; where both models are defined
    this is a collar-matching certificate.
    """
    n = 2
    q = np.zeros(n)
    q[0] = 1.0
    p = np.zeros(n)
    p[1] = 1.0
    x = BindingPoint(q=q, p=p, r=r, phi=0.0)
    R = reeb_field_binding(bp, x)
    # push: dq -> dq, dp -> dp/r - p dr/r^2 (dr = 0), dphi -> dphi/(2 pi)
    push_dq = R.dq
    push_dp = R.dp / r
    push_dphi = R.dphi / (2.0 * math.pi)
    data, Ndphi, tdq, tdp = reeb_field_tilde(tp, q, p / r)
    return max(float(np.max(np.abs(push_dq - tdq))),
               float(np.max(np.abs(push_dp - tdp))),
               abs(push_dphi - Ndphi))


def dalpha_tilde(tp: TwistProfile, q, p, u, v) -> float:
    """d(alpha~)(u, v) with alpha~ = htilde(|p|) dphi + p.dq.

    u, v are triples (dphi, dq, dp); |p| is free on the torus model.
    """
    s = float(np.linalg.norm(p))
    htd = tp.htilde.d1(s)
    du_s = float(p @ u[2]) / s
    dv_s = float(p @ v[2]) / s
    term1 = htd * (du_s * v[0] - dv_s * u[0])
    term2 = float(u[2] @ v[1] - v[2] @ u[1])
    return term1 + term2


def symplectic_frame(tp: TwistProfile, q: np.ndarray, p: np.ndarray,
                     phase: float):
    """Rotating symplectic frame of the contact planes along an orbit
    at level s = |p| of the torus model.

    Returns (frame, norm_factor): 2n-2 triples (dphi, dq, dp) ordered
    (P', Q', r_1 dp, r_1 dq, ...), where (P', Q') is the pair
    (P, Q/norm_factor) rotated by 2*pi*phase.  norm_factor is the
    value dalpha~(P, Q) = h_k/htilde_k making the pair symplectically
    normalized; it is computed numerically and returned for inspection.
    """
    q = np.asarray(q, float)
    p = np.asarray(p, float)
    s = float(np.linalg.norm(p))
    if s <= 1e-12:
        raise GeometryError("frame is singular at |p| = 0")
    n = len(q)
    ht = tp.htilde(s)
    P = (0.0, np.zeros(n), p / s)
    # Q = -G - (|p|/htilde) dphi with G = |p| q dp - (1/|p|) p dq
    Q = (-s / ht, p / s, -s * q)
    c = dalpha_tilde(tp, q, p, P, Q)
    Qn = (Q[0] / c, Q[1] / c, Q[2] / c)
    th = 2.0 * math.pi * phase
    co, si = math.cos(th), math.sin(th)

    def comb(a, ca, b, cb):
        return (ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2])

    Pp = comb(P, co, Qn, -si)
    Qp = comb(P, si, Qn, co)
    frame = [Pp, Qp]
    # directions orthogonal to both q and p, via Gram-Schmidt on the
    # ambient basis
    basis = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        e -= (e @ q) * q + (e @ (p / s)) * (p / s)
        for b in basis:
            e -= (e @ b) * b
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            basis.append(e / nrm)
    if len(basis) != n - 2:
        raise GeometryError("Gram-Schmidt produced a wrong number of normals")
    for rl in basis:
        frame.append((0.0, np.zeros(n), rl.copy()))
        frame.append((0.0, rl.copy(), np.zeros(n)))
    return frame, c


def frame_gram(tp: TwistProfile, q, p, frame) -> np.ndarray:
    m = len(frame)
    G = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            G[i, j] = dalpha_tilde(tp, q, p, frame[i], frame[j])
    return G


def standard_gram(m: int) -> np.ndarray:
    G = np.zeros((m, m))
    for j in range(0, m, 2):
        G[j, j + 1] = 1.0
        G[j + 1, j] = -1.0
    return G


# ----------------------------------------------------------------------
# identity suite
# ----------------------------------------------------------------------

def identity_suite(tp: TwistProfile, bp: BindingProfile, n: int = 2,
                   n_points: int = 1000, seed: int = 0) -> dict:
    """Pointwise checks of the structural identities at random points.

    Returns a dict of named maximum residuals; the CLI renders it as a
    pass/fail table.
    """
    rng = np.random.default_rng(seed)
    out = {}

    worst_alpha = 0.0
    worst_dalpha = 0.0
    worst_JJ = 0.0
    worst_compat = math.inf
    worst_Jdt = 0.0
    worst_Jdr = 0.0
    for _ in range(n_points):
        x = random_binding_point(n, bp, rng)
        X = SymplPoint(base=x)
        R = reeb_field_binding(bp, x)
        worst_alpha = max(worst_alpha, abs(alpha_binding(bp, x, R) - 1.0))
        v = random_tangent(x, rng)
        worst_dalpha = max(worst_dalpha, abs(dalpha_binding(bp, x, R, v)))
        Jv = apply_J(bp, X, v)
        JJv = apply_J(bp, X, Jv)
        worst_JJ = max(worst_JJ, JJv.plus(v).norm() / max(v.norm(), 1e-30))
        # contact-plane compatibility: project v onto ker alpha
        av = alpha_binding(bp, x, v)
        vxi = v.plus(R.scaled(-av))
        if vxi.norm() > 1e-8:
            worst_compat = min(worst_compat,
                               dalpha_binding(bp, x, vxi, apply_J(bp, X, vxi))
                               / vxi.norm() ** 2)
        dt_vec = TangentVector(0.0, np.zeros(n), np.zeros(n), 0.0, 1.0)
        Jdt = apply_J(bp, X, dt_vec)
        worst_Jdt = max(worst_Jdt, Jdt.plus(R.scaled(-1.0)).norm())
        dr_vec = TangentVector(0.0, np.zeros(n), np.zeros(n), 1.0, 0.0)
        Jdr = apply_J(bp, X, dr_vec)
        G = geo_field_binding(bp, x)
        worst_Jdr = max(worst_Jdr, Jdr.plus(G.scaled(-1.0)).norm())
    out["alpha_of_reeb_minus_1"] = worst_alpha
    out["dalpha_reeb_contraction"] = worst_dalpha
    out["J_squared_plus_id"] = worst_JJ
    out["min_compatibility_quotient"] = worst_compat
    out["J_dt_minus_reeb"] = worst_Jdt
    out["J_dr_minus_geofield"] = worst_Jdr

    # exact-vs-FD cross-check of dalpha at a smaller sample
    worst_fd = 0.0
    for _ in range(20):
        x = random_binding_point(n, bp, rng)
        u, v = random_tangent(x, rng), random_tangent(x, rng)
        ex = dalpha_binding(bp, x, u, v)
        fd = dalpha_binding_fd(bp, x, u, v)
        worst_fd = max(worst_fd, abs(ex - fd) / max(abs(ex), 1.0))
    out["dalpha_exact_vs_fd"] = worst_fd

    # frame symplecticity at random torus points and phases
    worst_gram = 0.0
    for _ in range(100):
        q = rng.standard_normal(max(n, 2))
        q /= np.linalg.norm(q)
        p = rng.standard_normal(len(q))
        p -= (p @ q) * q
        p *= rng.uniform(0.2, 1.0) / np.linalg.norm(p)
        frame, c = symplectic_frame(tp, q, p, rng.uniform(0.0, 1.0))
        G = frame_gram(tp, q, p, frame)
        worst_gram = max(worst_gram, float(np.max(np.abs(G - standard_gram(len(frame))))))
    out["frame_gram_vs_standard"] = worst_gram

    # two-model Reeb agreement on the collar (matched profiles only)
    if bp.collar is not None:
        lo, hi = bp.collar
        lo = max(lo, 1.0 / tp.s_max) * (1.0 + 1e-9)
        rs = np.linspace(lo, hi, 40)
        worst_push = 0.0
        for r in rs:
            worst_push = max(worst_push, push_reeb_to_tilde(tp, bp, float(r)))
        out["reeb_push_collar_mismatch"] = worst_push
    return out
