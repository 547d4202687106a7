"""Dense primal-dual interior-point solver for small second-order cone programs.

Solves
    minimize    c'x
    subject to  G x + s = h,   s in K,

where K is a Cartesian product of second-order (Lorentz) cones
Q_d = {(u0, u_) in R x R^(d-1) : u0 >= ||u_||}; a cone of dimension 1 is the
nonnegative ray.  The dual is  maximize -h'z  s.t.  G'z + c = 0, z in K.

The method is the homogeneous self-dual embedding with Nesterov-Todd scaling
and a Mehrotra predictor-corrector step, dense numpy linear algebra
throughout.  It is sized for the problems this package generates (tens to a
few hundred variables, a handful of cone blocks) and supports nothing else:
no free rows, no equality constraints, no sparsity.

G must have full column rank (every variable must enter some cone row);
the reduced KKT matrix G' W^-2 G is then positive definite and a Cholesky
factorization is reused for both right-hand sides of each iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

_STEP = 0.99
_MIN_STEP = 1e-13


class ConeSpec:
    """Index bookkeeping for a product of second-order cones."""

    __slots__ = ("dims", "heads", "block_ids", "m", "deg", "nblocks")

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("cone dimensions must be positive integers")
        self.dims = dims
        self.nblocks = len(dims)
        heads = np.zeros(self.nblocks, dtype=np.intp)
        np.cumsum(dims[:-1], out=heads[1:] if self.nblocks > 1 else heads[:0])
        self.heads = heads
        self.m = int(sum(dims))
        # barrier degree: each Lorentz cone has Jordan rank 2
        self.deg = 2 * self.nblocks
        self.block_ids = np.repeat(np.arange(self.nblocks), dims)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.m)
        e[self.heads] = 1.0
        return e

    def dot(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Per-block standard inner products."""
        return np.add.reduceat(u * v, self.heads)

    def jdot(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Per-block hyperbolic products u0*v0 - u_'v_."""
        prod = u * v
        return 2.0 * prod[self.heads] - np.add.reduceat(prod, self.heads)

    def interior(self, u: np.ndarray) -> bool:
        return bool((u[self.heads] > 0).all() and (self.jdot(u, u) > 0).all())

    def jprod(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Jordan product u o v = (u'v, u0*v_ + v0*u_) per block."""
        out = u * v[self.heads][self.block_ids] + v * u[self.heads][self.block_ids]
        out[self.heads] = self.dot(u, v)
        return out

    def jdiv(self, lam: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Solve lam o u = d for u, lam interior."""
        rho = self.jdot(lam, lam)
        u0 = self.jdot(lam, d) / rho
        lam0 = lam[self.heads]
        out = (d - u0[self.block_ids] * lam) / lam0[self.block_ids]
        out[self.heads] = u0
        return out

    def max_step(self, u: np.ndarray, d: np.ndarray) -> float:
        """Largest alpha >= 0 with u + alpha*d in K, for u interior."""
        a = self.jdot(d, d)
        b = self.jdot(u, d)
        c0 = self.jdot(u, u)
        alpha = np.full(self.nblocks, np.inf)
        neg = a < 0.0
        if neg.any():
            disc = b[neg] * b[neg] - a[neg] * c0[neg]
            alpha[neg] = (-b[neg] - np.sqrt(disc)) / a[neg]
        pos = (a > 0.0) & (b < 0.0)
        if pos.any():
            disc = b[pos] * b[pos] - a[pos] * c0[pos]
            ok = disc >= 0.0
            root = np.full(int(pos.sum()), np.inf)
            root[ok] = c0[pos][ok] / (-b[pos][ok] + np.sqrt(disc[ok]))
            alpha[pos] = root
        lin = (a == 0.0) & (b < 0.0)
        if lin.any():
            alpha[lin] = -c0[lin] / (2.0 * b[lin])
        # apex exits (head sign flip while the hyperbolic form only grazes
        # zero) are invisible to the quadratic; the head crossing is always
        # a valid upper bound on the feasible interval
        u0 = u[self.heads]
        d0 = d[self.heads]
        drop = d0 < 0.0
        if drop.any():
            alpha[drop] = np.minimum(alpha[drop], -u0[drop] / d0[drop])
        return float(alpha.min())


class _Scaling:
    """Nesterov-Todd scaling W for a product of Lorentz cones.

    Per block W = eta * V(w) with w'Jw = 1 and V(w) the symmetric
    J-orthogonal factor (V(w)^2 = 2ww' - J), so that
    lambda = W z = W^-1 s.
    """

    __slots__ = ("spec", "w", "w0", "eta", "lam")

    def __init__(self, spec: ConeSpec, s: np.ndarray, z: np.ndarray):
        self.spec = spec
        heads, bid = spec.heads, spec.block_ids
        rho_s = spec.jdot(s, s)
        rho_z = spec.jdot(z, z)
        if (rho_s <= 0).any() or (rho_z <= 0).any():
            raise LinAlgError("scaling point left the cone interior")
        sbar = s / np.sqrt(rho_s)[bid]
        zbar = z / np.sqrt(rho_z)[bid]
        gamma = np.sqrt((1.0 + spec.dot(sbar, zbar)) / 2.0)
        jz = -zbar
        jz[heads] = zbar[heads]
        self.w = (sbar + jz) / (2.0 * gamma)[bid]
        self.w0 = self.w[heads]
        self.eta = (rho_s / rho_z) ** 0.25
        self.lam = self.apply_w(z)

    # -- V(w) applications ------------------------------------------------
    def _v(self, u: np.ndarray) -> np.ndarray:
        spec, w, w0 = self.spec, self.w, self.w0
        heads, bid = spec.heads, spec.block_ids
        u0 = u[heads]
        q = spec.dot(w, u) - w0 * u0
        out = u + w * (u0 + q / (1.0 + w0))[bid]
        out[heads] = w0 * u0 + q
        return out

    def _v_inv(self, u: np.ndarray) -> np.ndarray:
        heads = self.spec.heads
        ju = -u
        ju[heads] = u[heads]
        out = -self._v(ju)
        out[heads] = -out[heads]
        return out

    def apply_w(self, u: np.ndarray) -> np.ndarray:
        return self._v(u) * self.eta[self.spec.block_ids]

    def apply_w_inv(self, u: np.ndarray) -> np.ndarray:
        return self._v_inv(u) / self.eta[self.spec.block_ids]

    def apply_w_inv_mat(self, B: np.ndarray) -> np.ndarray:
        spec, w, w0 = self.spec, self.w, self.w0
        heads, bid = spec.heads, spec.block_ids
        JB = -B
        JB[heads] = B[heads]
        U0 = JB[heads]
        Q = np.add.reduceat(w[:, None] * JB, heads, axis=0) - w0[:, None] * U0
        out = JB + w[:, None] * (U0 + Q / (1.0 + w0)[:, None])[bid]
        out[heads] = w0[:, None] * U0 + Q
        out = -out
        out[heads] = -out[heads]
        return out / self.eta[bid, None]


@dataclass
class SocpResult:
    """Outcome of a cone-program solve.

    For status "optimal", x/s/z are the de-homogenized primal-dual solution
    and obj = c'x.  For "primal_infeasible", z is the Farkas certificate
    (G'z ~ 0, h'z = -1).  For "dual_infeasible", x is the unbounded ray.
    "indeterminate" means the iteration limit or a numerical stall was hit
    before any of the three certificates was established.
    """

    status: str
    x: np.ndarray | None
    s: np.ndarray | None
    z: np.ndarray | None
    obj: float | None
    iterations: int
    pres: float
    dres: float
    relgap: float


def solve_socp(
    c: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    dims,
    *,
    feastol: float = 1e-8,
    abstol: float = 1e-9,
    reltol: float = 1e-8,
    max_iters: int = 100,
) -> SocpResult:
    spec = dims if isinstance(dims, ConeSpec) else ConeSpec(dims)
    G = np.ascontiguousarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    h = np.asarray(h, dtype=float)
    m, n = G.shape
    if m != spec.m or c.shape != (n,) or h.shape != (m,):
        raise ValueError("inconsistent problem dimensions")

    x = np.zeros(n)
    s = spec.identity()
    z = spec.identity()
    tau, kappa = 1.0, 1.0
    normc = max(1.0, float(np.linalg.norm(c)))
    normh = max(1.0, float(np.linalg.norm(h)))
    e = spec.identity()

    # double-precision Cholesky degrades once mu shrinks ~12 orders below its
    # start; keep the best iterate and accept it with relaxed tolerances if
    # the strict test never quite fires
    mu0 = (spec.nblocks + 1.0) / (spec.deg + 1.0)
    best = None
    best_score = np.inf

    pres = dres = relgap = np.inf
    it = 0
    for it in range(max_iters):
        Gx = G @ x
        Gtz = G.T @ z
        cx = float(c @ x)
        hz = float(h @ z)
        rx = Gtz + c * tau
        rz = Gx + s - h * tau
        rtau = cx + hz + kappa
        gap = float(s @ z)

        pres = float(np.linalg.norm(rz)) / tau / normh
        dres = float(np.linalg.norm(rx)) / tau / normc
        pcost = cx / tau
        agap = gap / (tau * tau)
        relgap = agap / max(1.0, abs(pcost), abs(hz / tau))
        if pres <= feastol and dres <= feastol and (agap <= abstol or relgap <= reltol):
            return SocpResult("optimal", x / tau, s / tau, z / tau, pcost,
                              it, pres, dres, relgap)
        if hz < 0.0 and float(np.linalg.norm(Gtz)) / (-hz) / normc <= feastol:
            return SocpResult("primal_infeasible", None, None, z / (-hz), None,
                              it, pres, dres, relgap)
        if cx < 0.0 and float(np.linalg.norm(Gx + s)) / (-cx) / normh <= feastol:
            return SocpResult("dual_infeasible", x / (-cx), s / (-cx), None, None,
                              it, pres, dres, relgap)
        score = max(pres, dres, relgap)
        if score < best_score:
            best_score = score
            best = (x / tau, s / tau, z / tau, pcost, it, pres, dres, relgap)

        try:
            scal = _Scaling(spec, s, z)
        except LinAlgError:
            break
        lam = scal.lam
        mu = (gap + tau * kappa) / (spec.deg + 1)
        if mu <= 1e-13 * mu0:
            break

        Gtil = scal.apply_w_inv_mat(G)
        M = Gtil.T @ Gtil
        cho = None
        jitter = 0.0
        for _ in range(3):
            try:
                cho = cho_factor(M + jitter * np.eye(n), lower=True, check_finite=False)
                break
            except LinAlgError:
                jitter = max(10.0 * jitter, 1e-12 * float(M.diagonal().max()))
        if cho is None:
            break

        def ksolve(bx, bz):
            bbz = scal.apply_w_inv(bz)
            dx = cho_solve(cho, bx + Gtil.T @ bbz, check_finite=False)
            dz = scal.apply_w_inv(Gtil @ dx - bbz)
            return dx, dz

        x1, z1 = ksolve(-c, h)
        den_tau = float(c @ x1 + h @ z1) - kappa / tau

        lamlam = spec.jprod(lam, lam)

        def direction(ds, dtk, damp):
            vs = spec.jdiv(lam, ds)
            x2, z2 = ksolve(-damp * rx, -damp * rz - scal.apply_w(vs))
            dtau = (-damp * rtau - float(c @ x2 + h @ z2) - dtk / tau) / den_tau
            dx = x2 + dtau * x1
            dz = z2 + dtau * z1
            wdz = scal.apply_w(dz)
            ds_scaled = vs - wdz  # equals W^-1 (Delta s)
            dsv = scal.apply_w(ds_scaled)
            dkappa = (dtk - kappa * dtau) / tau
            return dx, dz, dsv, dtau, dkappa, wdz, ds_scaled

        # predictor
        dxa, dza, dsa, dtaua, dkappaa, wdza, dssca = direction(-lamlam, -tau * kappa, 1.0)
        alpha = min(spec.max_step(s, dsa), spec.max_step(z, dza))
        if dtaua < 0.0:
            alpha = min(alpha, -tau / dtaua)
        if dkappaa < 0.0:
            alpha = min(alpha, -kappa / dkappaa)
        alpha = min(1.0, alpha)
        mu_aff = (float((s + alpha * dsa) @ (z + alpha * dza))
                  + (tau + alpha * dtaua) * (kappa + alpha * dkappaa)) / (spec.deg + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        ds = -lamlam - spec.jprod(dssca, wdza) + sigma * mu * e
        dtk = -tau * kappa - dtaua * dkappaa + sigma * mu
        dx, dz, dsv, dtau, dkappa, _, _ = direction(ds, dtk, 1.0 - sigma)

        alpha = min(spec.max_step(s, dsv), spec.max_step(z, dz))
        if dtau < 0.0:
            alpha = min(alpha, -tau / dtau)
        if dkappa < 0.0:
            alpha = min(alpha, -kappa / dkappa)
        alpha = min(1.0, _STEP * alpha)
        if alpha < _MIN_STEP:
            break

        x += alpha * dx
        z += alpha * dz
        s += alpha * dsv
        tau += alpha * dtau
        kappa += alpha * dkappa

    if best is not None and best_score <= 1e-6:
        bx, bs, bz, bobj, bit, bpres, bdres, brelgap = best
        return SocpResult("optimal", bx, bs, bz, bobj, bit, bpres, bdres, brelgap)
    return SocpResult("indeterminate", x / tau, s / tau, z / tau, float(c @ x) / tau,
                      it + 1, pres, dres, relgap)
