"""Positive-definiteness probes through finite Gram matrices.

The pairing under test is M[i][j] = integral of (G_i . G_j) k, where the
product sums over every pair of subsets whose union is the argument (the
cover product, a strictly larger sum than the disjoint convolution). A
kernel passes when the matrix over a finite basis of bounded test kernels
is positive semidefinite; since only finitely many test functions are
probed, a pass is reported as "no violation found", never as a proof.

A two-type variant pairs functions of configuration pairs against a
factorized kernel k1(plus) * k2(minus), with the cover sum acting on each
type coordinate independently. Lifting a one-type basis function G to
G(plus union minus) turns one product into the other, which is what the
transfer check exploits: two-type positivity of k1 x k2 must force
one-type positivity of k1 * k2, and the lifted two-type Gram matrix must
match the one-type Gram matrix of the convolution entry by entry.

Closed forms cover level-<=1 bases against level-factorizable kernels;
everything else runs Monte Carlo with the cover sum enumerated over the
subset lattice of each sampled configuration. Entries use per-entry
derived streams, so the matrix is reproducible regardless of the order
(or concurrency) of entry evaluation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import exp, sqrt

import numpy as np

from .fields import const_field, fprod, fscale, fsum, indicator_box
from .kernels import (
    CustomKernel,
    EmptyIndicator,
    Kernel,
    KernelSum,
    LevelWeights,
    ScaledKernel,
    SingletonKernel,
    tabulate,
)
from .model import GroundConfiguration, PhaseSpace
from .poisson import IntegralEstimate, integrate_mc, sample_pool
from .quadrature import box_integral
from .rng import seed_trace
from .transforms import (
    TwoTypeSetFunction,
    conv_kernels,
    cover_fast_values,
    two_type_cover,
)

_NO_VIOLATION = "no violation found"
_VIOLATION = "violation found"


@dataclass(frozen=True)
class GramReport:
    """Eigenvalue verdict of one pairing matrix.

    matrix is symmetrized; asymmetry records the largest entry gap before
    symmetrization (zero on closed-form routes, within error bars on MC).
    psd means min_eig >= -tol; the verdict wording stays a necessary
    condition because only a finite basis was probed.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    min_eig: float
    psd: bool
    tol: float
    integration_stderr: np.ndarray
    asymmetry: float
    exact: bool
    verdict: str


def _finish_report(M: np.ndarray, stderr: np.ndarray, exact: bool,
                   tol: float | None) -> GramReport:
    asym = float(np.abs(M - M.T).max()) if M.size else 0.0
    sym = 0.5 * (M + M.T)
    eig = np.linalg.eigvalsh(sym) if sym.size else np.zeros(0)
    min_eig = float(eig[0]) if eig.size else 0.0
    if tol is None:
        n = M.shape[0]
        tol = 1e-8 if exact else max(3.0 * float(stderr.max(initial=0.0)) * n, 1e-12)
    psd = min_eig >= -tol
    return GramReport(sym, eig, min_eig, psd, float(tol), stderr, asym, exact,
                      _NO_VIOLATION if psd else _VIOLATION)


# -- level-1 structure detection ---------------------------------------------

def level1_form(G: Kernel):
    """(c, phi) with G = c 1_{eta empty} + phi(x) 1_{|eta|=1}, else None."""
    if isinstance(G, EmptyIndicator):
        return 1.0, None
    if isinstance(G, SingletonKernel):
        return 0.0, G.field
    if isinstance(G, LevelWeights):
        if G.support_level() > 1:
            return None
        w = G.weights
        return w[0], (const_field(w[1]) if len(w) > 1 else None)
    if isinstance(G, ScaledKernel):
        inner = level1_form(G.kernel)
        if inner is None:
            return None
        c, phi = inner
        return G.coeff * c, (None if phi is None else fscale(G.coeff, phi))
    if isinstance(G, KernelSum):
        c, phis = 0.0, []
        for t in G.terms:
            inner = level1_form(t)
            if inner is None:
                return None
            c += inner[0]
            if inner[1] is not None:
                phis.append(inner[1])
        return c, (fsum(*phis) if phis else None)
    return None


def _closed_gram(forms, k: Kernel, space: PhaseSpace, win) -> np.ndarray | None:
    """Exact pairing matrix for a level-<=1 basis and a factorizable kernel.

    Only levels 0..2 of k contribute: the cover product of two level-<=1
    functions vanishes on configurations of three or more points.
    """
    fact = k.level_factorization()
    if fact is None or any(f is None for f in forms):
        return None
    w = fact.weights(2)
    g = fact.field
    dens = space.density
    n = len(forms)
    cs = np.array([f[0] for f in forms])
    phis = [f[1] for f in forms]

    def moment(*fs) -> float:
        if any(f is None for f in fs):
            return 0.0
        return box_integral(fprod(*fs, g, dens), win)

    J = np.array([moment(phi) for phi in phis])
    M = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            cross = cs[i] * J[j] + cs[j] * J[i] + moment(phis[i], phis[j])
            M[i, j] = M[j, i] = (w[0] * cs[i] * cs[j]
                                 + space.z * w[1] * cross
                                 + space.z ** 2 * w[2] * J[i] * J[j])
    return M


# -- Monte Carlo entries ------------------------------------------------------

def _entry_map(fn, jobs):
    workers = int(os.environ.get("STARCALC_THREADS", "1") or "1")
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def _cover_entry_kernel(Gi: Kernel, Gj: Kernel, k: Kernel) -> Kernel:
    """(Gi . Gj)(eta) k(eta) with the cover sum enumerated over eta's subsets."""
    li, lj = Gi.support_level(), Gj.support_level()
    cap = None if li is None or lj is None else li + lj

    def fn(pts) -> float:
        m = len(pts)
        if cap is not None and m > cap:
            return 0.0
        kv = k.value(pts)
        if kv == 0.0:
            return 0.0
        sub = GroundConfiguration(pts)
        ti = tabulate(Gi, sub)
        tj = tabulate(Gj, sub)
        return float(cover_fast_values(ti.values, tj.values, m)[-1]) * kv

    return CustomKernel(fn, support_level=cap)


def gram_star(k: Kernel, basis, space: PhaseSpace, window=None,
              method: str = "auto", n_samples: int = 20000, seed: int = 0,
              tol: float | None = None) -> GramReport:
    """Pairing matrix of the cover products of a kernel basis against k.

    method "auto" takes the closed form whenever the basis is level-<=1
    and k factorizes over levels; "mc" forces Monte Carlo, where entry
    (i, j) integrates on its own derived stream.
    """
    basis = list(basis)
    n = len(basis)
    win = space.window(window)
    if method == "auto":
        M = _closed_gram([level1_form(G) for G in basis], k, space, win)
        if M is not None:
            return _finish_report(M, np.zeros((n, n)), True, tol)
    elif method != "mc":
        raise ValueError(f"unknown method {method!r}")

    def entry(ij):
        i, j = ij
        return integrate_mc(_cover_entry_kernel(basis[i], basis[j], k), space,
                            win, n_samples, seed, stream=100 + i * n + j)

    jobs = [(i, j) for i in range(n) for j in range(n)]
    ests = _entry_map(entry, jobs)
    M = np.array([e.value for e in ests]).reshape(n, n)
    S = np.array([e.stderr for e in ests]).reshape(n, n)
    return _finish_report(M, S, False, tol)


# -- two-type kernels ---------------------------------------------------------

class TwoTypeKernel:
    """Function of a configuration pair (plus points, minus points)."""

    def value(self, pts_plus, pts_minus) -> float:
        raise NotImplementedError

    def __call__(self, pts_plus, pts_minus) -> float:
        return self.value(pts_plus, pts_minus)

    def support_pair(self):
        """(plus cap, minus cap, total cap), each None if unbounded."""
        return None, None, None


class ProductTwoType(TwoTypeKernel):
    """A(plus) * B(minus), the factorized two-type form."""

    def __init__(self, A: Kernel, B: Kernel):
        self.A = A
        self.B = B

    def value(self, pts_plus, pts_minus) -> float:
        return self.A.value(pts_plus) * self.B.value(pts_minus)

    def support_pair(self):
        p, m = self.A.support_level(), self.B.support_level()
        return p, m, (p + m if p is not None and m is not None else None)


class LiftedKernel(TwoTypeKernel):
    """G(plus union minus): a one-type kernel read on the merged pair."""

    def __init__(self, G: Kernel):
        self.G = G

    def value(self, pts_plus, pts_minus) -> float:
        a = np.asarray(pts_plus, dtype=float)
        b = np.asarray(pts_minus, dtype=float)
        if a.size == 0:
            return self.G.value(b)
        if b.size == 0:
            return self.G.value(a)
        return self.G.value(np.concatenate([a, b], axis=0))

    def support_pair(self):
        t = self.G.support_level()
        return t, t, t


def lift_basis(basis) -> list:
    return [LiftedKernel(G) for G in basis]


def _pair_caps(Gi: TwoTypeKernel, Gj: TwoTypeKernel):
    def add(a, b):
        return np.inf if a is None or b is None else a + b

    pi, mi, ti = Gi.support_pair()
    pj, mj, tj = Gj.support_pair()
    return add(pi, pj), add(mi, mj), add(ti, tj)


def _two_type_cover_value(Gi: TwoTypeKernel, Gj: TwoTypeKernel,
                          ptsP: np.ndarray, ptsM: np.ndarray) -> float:
    """Cover product of two two-type kernels at one configuration pair."""
    gp = GroundConfiguration(ptsP)
    gm = GroundConfiguration(ptsM)
    ap, am = gp.as_array(), gm.as_array()

    def table(G):
        vals = np.empty((1 << gp.size, 1 << gm.size))
        for sp in range(1 << gp.size):
            sel_p = ap[[i for i in range(gp.size) if sp >> i & 1]]
            for sm in range(1 << gm.size):
                sel_m = am[[i for i in range(gm.size) if sm >> i & 1]]
                vals[sp, sm] = G.value(sel_p, sel_m)
        return TwoTypeSetFunction(gp, gm, vals)

    return float(two_type_cover(table(Gi), table(Gj)).values[-1, -1])


def _closed_two_type(khat: ProductTwoType, basis, space: PhaseSpace, win):
    """Exact two-type pairing matrix, when one exists.

    Product bases factor entrywise into two one-type matrices. Lifted
    level-<=1 bases reduce to a six-term sum over the (plus, minus) level
    pairs up to total level two, with each factor kernel contributing its
    own level weights and field moments.
    """
    fa = khat.A.level_factorization()
    fb = khat.B.level_factorization()
    if fa is None or fb is None:
        return None
    if all(isinstance(G, ProductTwoType) for G in basis):
        MA = _closed_gram([level1_form(G.A) for G in basis], khat.A, space, win)
        MB = _closed_gram([level1_form(G.B) for G in basis], khat.B, space, win)
        return None if MA is None or MB is None else MA * MB
    if not all(isinstance(G, LiftedKernel) for G in basis):
        return None
    forms = [level1_form(G.G) for G in basis]
    if any(f is None for f in forms):
        return None
    wa, wb = fa.weights(2), fb.weights(2)
    dens = space.density
    n = len(forms)
    cs = np.array([f[0] for f in forms])
    phis = [f[1] for f in forms]

    def moment(g, *fs) -> float:
        if any(f is None for f in fs):
            return 0.0
        return box_integral(fprod(*fs, g, dens), win)

    JA = np.array([moment(fa.field, phi) for phi in phis])
    JB = np.array([moment(fb.field, phi) for phi in phis])
    z = space.z
    M = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            crossA = cs[i] * JA[j] + cs[j] * JA[i] + moment(fa.field, phis[i], phis[j])
            crossB = cs[i] * JB[j] + cs[j] * JB[i] + moment(fb.field, phis[i], phis[j])
            M[i, j] = M[j, i] = (
                wa[0] * wb[0] * cs[i] * cs[j]
                + z * (wa[1] * wb[0] * crossA + wb[1] * wa[0] * crossB)
                + z ** 2 * (wa[1] * wb[1] * (JA[i] * JB[j] + JB[i] * JA[j])
                            + wa[2] * wb[0] * JA[i] * JA[j]
                            + wb[2] * wa[0] * JB[i] * JB[j]))
    return M


def _two_type_entry_mc(Gi: TwoTypeKernel, Gj: TwoTypeKernel, khat: ProductTwoType,
                       space: PhaseSpace, win, n_samples: int, seed: int,
                       streams) -> IntegralEstimate:
    poolP, lensP, mass = sample_pool(space, win, n_samples, seed, streams[0])
    poolM, lensM, _ = sample_pool(space, win, n_samples, seed, streams[1])
    k1v = khat.A.eval_batch(poolP, lensP)
    k2v = khat.B.eval_batch(poolM, lensM)
    capP, capM, capT = _pair_caps(Gi, Gj)
    offP = np.concatenate([[0], np.cumsum(lensP)])
    offM = np.concatenate([[0], np.cumsum(lensM)])
    vals = np.zeros(int(n_samples))
    for s in range(int(n_samples)):
        kv = k1v[s] * k2v[s]
        mp, mm = int(lensP[s]), int(lensM[s])
        if kv == 0.0 or mp > capP or mm > capM or mp + mm > capT:
            continue
        vals[s] = kv * _two_type_cover_value(
            Gi, Gj, poolP[offP[s]: offP[s + 1]], poolM[offM[s]: offM[s + 1]])
    scale = exp(2.0 * space.z * mass)
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) / sqrt(n_samples)
    return IntegralEstimate(scale * mean, scale * sd, int(n_samples), exact=False,
                            trace=f"{seed_trace(seed, streams[0])}+{seed_trace(seed, streams[1])}")


def gram_two_type(khat, basis, space: PhaseSpace, window=None,
                  method: str = "auto", n_samples: int = 20000, seed: int = 0,
                  tol: float | None = None) -> GramReport:
    """Two-type pairing matrix against a factorized kernel pair.

    khat is a ProductTwoType (or a plain (k1, k2) pair). Closed forms
    exist for all-product and all-lifted level-<=1 bases; otherwise each
    entry is a Monte Carlo double integral over independent plus / minus
    configuration pools on per-entry streams.
    """
    if not isinstance(khat, ProductTwoType):
        khat = ProductTwoType(*khat)
    basis = list(basis)
    n = len(basis)
    win = space.window(window)
    if method == "auto":
        M = _closed_two_type(khat, basis, space, win)
        if M is not None:
            return _finish_report(M, np.zeros((n, n)), True, tol)
    elif method != "mc":
        raise ValueError(f"unknown method {method!r}")

    def entry(ij):
        i, j = ij
        base = 1000 + 2 * (i * n + j)
        return _two_type_entry_mc(basis[i], basis[j], khat, space, win,
                                  n_samples, seed, (base, base + 1))

    jobs = [(i, j) for i in range(n) for j in range(n)]
    ests = _entry_map(entry, jobs)
    M = np.array([e.value for e in ests]).reshape(n, n)
    S = np.array([e.stderr for e in ests]).reshape(n, n)
    return _finish_report(M, S, False, tol)


# -- transfer criterion --------------------------------------------------------

@dataclass(frozen=True)
class TransferReport:
    """Both pairing matrices of the transfer check and their comparison.

    implication_ok fails only on the forbidden pattern: two-type verdict
    positive while the one-type verdict is not. entries_match asserts the
    lifted two-type matrix equals the one-type matrix of the convolution
    within combined error bars.
    """

    two_type: GramReport
    one_type: GramReport
    implication_ok: bool
    max_entry_gap: float
    gap_tol: float
    entries_match: bool


def critposdef_check(k1: Kernel, k2: Kernel, basis, space: PhaseSpace,
                     window=None, method: str = "auto", n_samples: int = 20000,
                     seed: int = 0, tol: float | None = None) -> TransferReport:
    """Lifted two-type positivity of k1 x k2 versus one-type positivity of
    the convolution k1 * k2, plus the entrywise equality of both matrices."""
    basis = list(basis)
    two = gram_two_type(ProductTwoType(k1, k2), lift_basis(basis), space,
                        window, method, n_samples, seed, tol)
    one = gram_star(conv_kernels(k1, k2), basis, space, window, method,
                    n_samples, seed, tol)
    gap = np.abs(two.matrix - one.matrix)
    sig = np.sqrt(two.integration_stderr ** 2 + one.integration_stderr ** 2)
    # quadrature error on the closed routes grows with entry size
    floor = 1e-8 * max(1.0, float(np.max(np.abs(one.matrix), initial=0.0)))
    tol_m = 3.0 * sig + floor
    return TransferReport(
        two, one,
        implication_ok=(not two.psd) or one.psd,
        max_entry_gap=float(gap.max(initial=0.0)),
        gap_tol=float(tol_m.max(initial=0.0)),
        entries_match=bool(np.all(gap <= tol_m)))


def default_basis(space: PhaseSpace, window=None, cells: int = 4) -> list:
    """Empty-set indicator plus singleton indicators of a slab partition.

    The window splits into `cells` equal slabs along the first axis; each
    slab contributes the kernel phi(x) 1_{|eta|=1} with phi its indicator.
    All members are bounded with bounded support, as the pairing requires.
    """
    win = space.window(window)
    lo, hi = win[0]
    edges = np.linspace(lo, hi, cells + 1)
    basis: list = [EmptyIndicator()]
    for c in range(cells):
        cell = win.copy()
        cell[0] = (edges[c], edges[c + 1])
        basis.append(SingletonKernel(indicator_box(cell)))
    return basis
