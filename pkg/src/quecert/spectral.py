"""Eigensolving and functional-calculus comparisons.

All operator functions (heat semigroup, spectral projections) go
through the generalized eigendecomposition of the pencil, which is
exact at finite dimension; resolvents use direct solves.  The closed
form constants for resolvent, projection and heat comparisons are
evaluated here and checked against measured operator norms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .certify import QueCertificate, weighted_operator_norm
from .errors import DomainError, NumericsError
from .forms import FormPencil
from .identify import IdentificationPair
from .models import by_name


@dataclass(eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues with mass-orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    pencil: FormPencil

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]

    def _require_full(self):
        if self.k != self.pencil.n:
            raise DomainError("operation needs the full decomposition")

    def function_operator(self, values) -> np.ndarray:
        """Matrix of the operator f(Laplacian) for f given by its values
        on the eigenvalues."""
        self._require_full()
        values = np.asarray(values)
        V = self.vectors
        return (V * values[None, :]) @ (V.T * self.pencil.M[None, :])

    def heat_operator(self, t: float) -> np.ndarray:
        if t < 0:
            raise DomainError("heat semigroup needs t >= 0")
        return self.function_operator(np.exp(-t * self.eigenvalues))

    def projection_operator(self, a: float, b: float) -> np.ndarray:
        """Spectral projection onto the open window (a, b)."""
        if not a < b:
            raise DomainError("window needs a < b")
        ind = ((self.eigenvalues > a) & (self.eigenvalues < b)).astype(float)
        return self.function_operator(ind)


def eigensolve(pencil: FormPencil, k: int | None = None) -> SpectralDecomposition:
    """Bottom k eigenpairs of the pencil (all of them by default).

    Solved by symmetric diagonal scaling to a standard problem, so the
    eigenvectors come out mass-orthonormal.  Sign convention: first
    entry of each vector that is nonzero at scale 1e-12 made positive.
    """
    n = pencil.n
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in 1..{n}, got {k}")
    if k == n and pencil._spectral is not None:
        return pencil._spectral

    d = np.sqrt(pencil.M)
    C = pencil.L / d[:, None] / d[None, :]
    C = (C + C.T) / 2.0
    try:
        if k == n:
            lam, Y = sla.eigh(C)
        else:
            lam, Y = sla.eigh(C, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise NumericsError(f"eigensolver failed: {e}")
    V = Y / d[:, None]

    # deterministic signs
    scale = np.max(np.abs(V), axis=0)
    for j in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, j]) > 1e-12 * scale[j])
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]

    dec = SpectralDecomposition(eigenvalues=lam, vectors=V, pencil=pencil)
    if k == n:
        pencil._spectral = dec
    return dec


def resolvent_action(pencil: FormPencil, z: complex, B: np.ndarray) -> np.ndarray:
    """Columnwise (Laplacian - z)^{-1} B via the solve (L - z M) X = M B."""
    z = complex(z)
    A = pencil.L.astype(complex) if z.imag != 0 else pencil.L.copy()
    idx = np.diag_indices(pencil.n)
    A[idx] = A[idx] - (z if z.imag != 0 else z.real) * pencil.M
    rhs = pencil.M[:, None] * B
    try:
        return sla.solve(A, rhs)
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise NumericsError(f"resolvent solve at z={z} failed: {e}")


def convergence_table(model, levels, k: int, reference="finest") -> dict:
    """Eigenvalue lambda_k per level against a reference value.

    reference: "finest" (largest level in the list), an explicit level,
    or "analytic" for the interval limit (k pi)^2.  Reports per-level
    error, the ratio to the proven delta rate, the largest such ratio,
    and the base-2 log-slope of the errors.
    """
    if isinstance(model, str):
        model = by_name(model)
    levels = sorted(set(int(m) for m in levels))
    if not levels:
        raise DomainError("need at least one level")
    if k < 0:
        raise DomainError("eigenvalue index must be nonnegative")

    from .forms import level_pencil

    if reference == "analytic":
        if model.name != "interval":
            raise DomainError(
                "analytic reference only available for the interval model"
            )
        ref_value = (k * math.pi) ** 2
        ref_level = None
    else:
        ref_level = max(levels) if reference == "finest" else int(reference)
        ref_pencil = level_pencil(model, ref_level)
        if k >= ref_pencil.n:
            raise DomainError(f"k={k} exceeds reference dimension {ref_pencil.n}")
        ref_value = float(eigensolve(ref_pencil, k + 1).eigenvalues[k])

    rows = []
    for m in levels:
        pencil = level_pencil(model, m)
        if k >= pencil.n:
            raise DomainError(f"k={k} exceeds dimension {pencil.n} at level {m}")
        lam = float(eigensolve(pencil, k + 1).eigenvalues[k])
        err = abs(lam - ref_value)
        rate = model.theory_delta(m)
        rows.append(
            {
                "level": m,
                "lambda": lam,
                "error": err,
                "fitted_C": err / rate,
            }
        )

    fit_rows = [r for r in rows if r["error"] > 0 and r["level"] != ref_level]
    if len(fit_rows) >= 2:
        ms = [r["level"] for r in fit_rows]
        es = np.log([r["error"] for r in fit_rows])
        slope = float(np.polyfit(ms, es, 1)[0] / math.log(2.0))
    else:
        slope = float("nan")
    return {
        "model": model.name,
        "k": k,
        "reference": "analytic" if ref_level is None else ref_level,
        "reference_value": ref_value,
        "rows": rows,
        "fitted_C": max(r["fitted_C"] for r in rows),
        "slope_log2": slope,
    }


def hausdorff_distance(specA, specB, window) -> float:
    """Two-sided Hausdorff distance between spectra inside a window.

    Both empty gives 0; exactly one empty gives +inf."""
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise DomainError("window must have positive length")
    A = [float(x) for x in specA if lo <= x <= hi]
    B = [float(x) for x in specB if lo <= x <= hi]
    if not A and not B:
        return 0.0
    if not A or not B:
        return math.inf
    d_ab = max(min(abs(a - b) for b in B) for a in A)
    d_ba = max(min(abs(b - a) for a in A) for b in B)
    return max(d_ab, d_ba)


def resolvent_constant(z: complex, specA, specB) -> float:
    """Closeness constant 4 (1 + |z+1| / d(z, spec))^2 with the distance
    taken to the union of the two computed spectra."""
    z = complex(z)
    spec = np.concatenate([np.asarray(specA, float), np.asarray(specB, float)])
    if spec.size == 0:
        raise DomainError("empty spectra")
    d = float(np.min(np.abs(spec - z)))
    if d <= 1e-12:
        raise DomainError(f"z={z} lies on the spectrum (distance {d:.2e})")
    return 4.0 * (1.0 + abs(z + 1.0) / d) ** 2


def resolvent_rough_constant(z: complex) -> float:
    """Spectrum-free upper bound on the resolvent constant, valid for
    nonnegative operators: distance replaced by |Im z| on the right half
    plane and |z| on the left."""
    z = complex(z)
    if z.real >= 0:
        if z.imag == 0:
            return math.inf
        factor = 1.0 + abs(z + 1.0) / abs(z.imag)
    else:
        factor = 1.0 + abs(z + 1.0) / abs(z)
    return 4.0 * factor**2


def resolvent_comparison(pair: IdentificationPair, cert: QueCertificate, z) -> dict:
    """Measure ||R~(z) J - J R(z)|| against C(z) delta."""
    cp, fp = pair.coarse, pair.fine
    decC = eigensolve(cp)
    decF = eigensolve(fp)
    constant = resolvent_constant(z, decC.eigenvalues, decF.eigenvalues)
    z = complex(z)
    # apply both resolvents through the cached decompositions
    Vf, Vc = decF.vectors, decC.vectors
    RJ = (Vf / (decF.eigenvalues - z)) @ ((Vf.T * fp.M) @ pair.J)
    Rc = (Vc / (decC.eigenvalues - z)) @ (Vc.T * cp.M)
    D = RJ - pair.J @ Rc
    norm = weighted_operator_norm(D, cp.M, fp.M)
    bound = constant * cert.delta_total
    return {
        "z": complex(z),
        "norm": norm,
        "constant": constant,
        "rough_constant": resolvent_rough_constant(z),
        "bound": bound,
        "ok": norm <= bound * (1.0 + 1e-8),
    }


def projection_constants(a: float, b: float, eps: float):
    """Constants of the spectral-window comparison for the indicator of
    (a, b) at spectral margin eps."""
    if not (-1.0 < a < b):
        raise DomainError("need -1 < a < b")
    if eps <= 0:
        raise DomainError("need eps > 0")
    c_eta = (
        (4.0 / math.pi)
        * (b - a + eps)
        * (1.0 + math.sqrt(1.0 + ((b + 1.0) / eps) ** 2)) ** 2
    )
    c_eta_prime = 5.0 * math.sqrt(b + 1.0) + 3.0 * c_eta
    return c_eta, c_eta_prime


def projection_comparison(pair: IdentificationPair, cert: QueCertificate, a, b) -> dict:
    """Spectral projections onto (a, b) on both levels, compared in the
    intertwining form P~ J - J P and the sandwich form P~ - J P Jp."""
    cp, fp = pair.coarse, pair.fine
    decC = eigensolve(cp)
    decF = eigensolve(fp)
    spec = np.concatenate([decC.eigenvalues, decF.eigenvalues])
    eps = float(min(np.min(np.abs(spec - a)), np.min(np.abs(spec - b))))
    if eps <= 1e-10:
        raise NumericsError(
            f"window edge within {eps:.2e} of a spectral point; move a or b"
        )
    c_eta, c_eta_prime = projection_constants(a, b, eps)
    Pc = decC.projection_operator(a, b)
    Pf = decF.projection_operator(a, b)
    D1 = Pf @ pair.J - pair.J @ Pc
    D2 = Pf - pair.J @ Pc @ pair.Jp
    n1 = weighted_operator_norm(D1, cp.M, fp.M)
    n2 = weighted_operator_norm(D2, fp.M, fp.M)
    b1 = c_eta * cert.delta_total
    b2 = c_eta_prime * cert.delta_total
    return {
        "window": (float(a), float(b)),
        "eps": eps,
        "C_eta": c_eta,
        "C_eta_prime": c_eta_prime,
        "norm_intertwine": n1,
        "bound_intertwine": b1,
        "ok_intertwine": n1 <= b1 * (1.0 + 1e-8),
        "norm_sandwich": n2,
        "bound_sandwich": b2,
        "ok_sandwich": n2 <= b2 * (1.0 + 1e-8),
    }


def heat_constant(t: float, theta: float = math.pi / 4) -> float:
    """Heat-semigroup comparison constant at time t, sector angle theta."""
    if t <= 0:
        raise DomainError("heat constant needs t > 0")
    if not 0.0 < theta < math.pi / 2:
        raise DomainError("theta must lie in (0, pi/2)")
    return (
        12.0 / (math.pi * math.cos(theta)) * (1.0 + 1.0 / math.sin(theta)) ** 2 / t
        + 5.0
    )


def heat_comparison(
    pair: IdentificationPair,
    cert: QueCertificate,
    t: float,
    theta: float = math.pi / 4,
) -> dict:
    """Measure ||exp(-t Lap~) J - J exp(-t Lap)|| against the heat
    constant times delta.  t = 0 is allowed and trivial (both sides are
    J); the constant is finite only for t > 0."""
    if t < 0:
        raise DomainError("need t >= 0")
    cp, fp = pair.coarse, pair.fine
    Hc = eigensolve(cp).heat_operator(t)
    Hf = eigensolve(fp).heat_operator(t)
    D = Hf @ pair.J - pair.J @ Hc
    norm = weighted_operator_norm(D, cp.M, fp.M)
    constant = heat_constant(t, theta) if t > 0 else math.inf
    bound = constant * cert.delta_total
    return {
        "t": float(t),
        "theta": float(theta),
        "constant": constant,
        "norm": norm,
        "bound": bound,
        "ok": norm <= bound * (1.0 + 1e-8),
    }


def heat_solution_comparison(
    pair: IdentificationPair,
    cert: QueCertificate,
    u0,
    times,
    theta: float = math.pi / 4,
) -> dict:
    """Evolve u0 on the fine level and its transfer Jp u0 on the coarse
    one; compare the trajectories in the fine mass norm at each time."""
    times = [float(t) for t in times]
    if any(t <= 0 for t in times):
        raise DomainError("trajectory times must be positive")
    cp, fp = pair.coarse, pair.fine
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (fp.n,):
        raise DomainError(f"u0 must live on the fine level ({fp.n} entries)")
    decC = eigensolve(cp)
    decF = eigensolve(fp)
    f0 = pair.Jp @ u0
    norm_u0 = fp.mass_norm(u0)
    rows = []
    for t in sorted(times):
        ut = decF.heat_operator(t) @ u0
        ft = decC.heat_operator(t) @ f0
        err = fp.mass_norm(ut - pair.J @ ft)
        bound = heat_constant(t, theta) * cert.delta_total * norm_u0
        rows.append(
            {
                "t": t,
                "error": err,
                "bound": bound,
                "ok": err <= bound * (1.0 + 1e-8),
            }
        )
    return {"norm_u0": norm_u0, "theta": float(theta), "rows": rows}


def _min_quadratic_on_sphere(A: np.ndarray, b: np.ndarray, beta: float) -> float:
    """min of c^T A c - 2 b^T c + beta over the unit sphere ||c|| = 1."""
    lam, Q = np.linalg.eigh((A + A.T) / 2.0)
    bt = Q.T @ b
    lam0 = float(lam[0])
    bnorm = float(np.linalg.norm(bt))
    if bnorm < 1e-15:
        return float(beta + lam0)

    def g(nu):
        return float(np.sum((bt / (lam - nu)) ** 2))

    lo = lam0 - bnorm - 1.0
    near = lam0 - 1e-13 * max(1.0, abs(lam0))
    if g(near) >= 1.0:
        nu = brentq(lambda v: g(v) - 1.0, lo, near, xtol=1e-15, maxiter=200)
        c = bt / (lam - nu)
        c /= np.linalg.norm(c)
    else:
        # multiplier sits at lam0; fill the norm on the lowest direction
        free = lam > lam0 + 1e-12 * max(1.0, abs(lam0))
        c = np.zeros_like(bt)
        c[free] = bt[free] / (lam[free] - lam0)
        t2 = max(1.0 - float(np.sum(c**2)), 0.0)
        sign = 1.0 if bt[0] >= 0 else -1.0
        c[0] += sign * math.sqrt(t2)
    return float(c @ (lam * c) - 2.0 * (bt @ c) + beta)


def eigenvector_comparison(
    pair: IdentificationPair,
    cert: QueCertificate,
    k: int,
    cluster_tol: float = 1e-8,
) -> dict:
    """Energy-norm distance of the fine eigenvector k to the prolonged
    coarse spectral subspace of its isolating disc.

    The disc is centered at the fine eigenvalue with radius half the gap
    to the rest of the fine spectrum; the comparison minimizes
    ||J phi - phi_k~||_E~ over unit phi in the selected coarse span."""
    cp, fp = pair.coarse, pair.fine
    decC = eigensolve(cp)
    decF = eigensolve(fp)
    if not 0 <= k < fp.n:
        raise DomainError(f"eigenvalue index {k} out of range")
    lamF = decF.eigenvalues
    center = float(lamF[k])
    outside = np.abs(lamF - center) > cluster_tol
    if not np.any(outside):
        gap = math.inf
        radius = math.inf
    else:
        gap = float(np.min(np.abs(lamF[outside] - center)))
        if gap <= cluster_tol:
            raise NumericsError(
                f"eigenvalue {k} not isolated: cluster gap {gap:.2e}"
            )
        radius = gap / 2.0
    sel = np.abs(decC.eigenvalues - center) < radius
    if not np.any(sel):
        raise NumericsError(
            f"no coarse eigenvalue inside the isolating disc around {center:.6g}"
        )
    V = decC.vectors[:, sel]
    W = pair.J @ V
    G = fp.energy_metric()
    phi = decF.vectors[:, k]
    GW = G @ W
    A = W.T @ GW
    b = W.T @ (G @ phi)
    beta = float(phi @ G @ phi)
    err2 = _min_quadratic_on_sphere(A, b, beta)
    err = math.sqrt(max(err2, 0.0))
    return {
        "k": k,
        "error": err,
        "gap": gap,
        "coarse_multiplicity": int(np.sum(sel)),
        "fitted_C": err / cert.delta_total if cert.delta_total > 0 else 0.0,
    }
