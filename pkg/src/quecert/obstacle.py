"""Discrete obstacle demo on the unit circle.

N grid points with spacing h = 1/N carry the free Laplacian; obstacles
are short arcs of grid points that get removed, and the complement
keeps the induced edges (discrete Neumann condition).  Restriction,
zero-extension and linear gap-fill extension identify the two spaces,
and every constant of the closeness argument is measured: the smallness
delta of the obstacle set, the extension norm C_ext, the elliptic
regularity constant C_ell_reg (exactly 1 on the circle) and the
graph-norm closeness defect against their product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import bilinear_pairing_norm, weighted_operator_norm
from .errors import ConfigError, DomainError
from .forms import FormPencil


@dataclass(eq=False)
class ObstacleModel:
    N: int
    h: float
    centers: tuple
    eps: float
    alpha: float
    obstacle_arcs: tuple  # tuple per obstacle: indices in circular order
    B: tuple  # all obstacle indices, sorted
    complement: tuple  # kept indices, sorted
    x_pencil: FormPencil
    complement_pencil: FormPencil


def _circle_pencil(N: int) -> FormPencil:
    h = 1.0 / N
    c = float(N)  # 1/h per edge
    L = np.zeros((N, N))
    for i in range(N):
        j = (i + 1) % N
        L[i, i] += c
        L[j, j] += c
        L[i, j] -= c
        L[j, i] -= c
    return FormPencil(L=L, M=np.full(N, h), model="circle", level=None)


def build_obstacle_model(N: int, centers, eps: float, alpha: float) -> ObstacleModel:
    """Validate the layout and assemble both pencils.

    Each obstacle covers the grid points within eps of its center along
    the circle.  Centers must be separated by more than 2 eps^alpha,
    arcs must be disjoint, and the complement must stay connected (on a
    circle that rules out two or more obstacles)."""
    if N < 16:
        raise ConfigError(f"grid too small: N={N} < 16")
    h = 1.0 / N
    eps = float(eps)
    alpha = float(alpha)
    if eps < h - 1e-12:
        raise ConfigError(f"obstacle radius {eps} below grid spacing {h}")
    centers = tuple(int(c) % N for c in centers)

    def circ_dist(i, j):
        d = abs(i - j)
        return min(d, N - d) * h

    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            sep = circ_dist(centers[a], centers[b])
            if sep <= 2.0 * eps**alpha:
                raise ConfigError(
                    f"centers {centers[a]} and {centers[b]} at distance "
                    f"{sep:.6g} violate the separation 2*eps^alpha = "
                    f"{2.0 * eps ** alpha:.6g}"
                )

    k = int(np.floor(eps * N + 1e-9))
    arcs = []
    for c in centers:
        arcs.append(tuple((c + d) % N for d in range(-k, k + 1)))
    flat = [i for arc in arcs for i in arc]
    if len(set(flat)) != len(flat):
        raise ConfigError("obstacle arcs overlap")
    B = tuple(sorted(flat))
    complement = tuple(i for i in range(N) if i not in set(B))
    if not complement:
        raise ConfigError("obstacles cover the whole circle")

    # connectivity of the induced complement graph
    comp_set = set(complement)
    seen = {complement[0]}
    stack = [complement[0]]
    while stack:
        v = stack.pop()
        for w in ((v + 1) % N, (v - 1) % N):
            if w in comp_set and w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(complement):
        raise ConfigError("complement of the obstacles is disconnected")

    x_pencil = _circle_pencil(N)
    pos = {v: r for r, v in enumerate(complement)}
    nc = len(complement)
    c = float(N)
    Lc = np.zeros((nc, nc))
    for v in complement:
        w = (v + 1) % N
        if w in comp_set:
            i, j = pos[v], pos[w]
            Lc[i, i] += c
            Lc[j, j] += c
            Lc[i, j] -= c
            Lc[j, i] -= c
    complement_pencil = FormPencil(
        L=Lc, M=np.full(nc, h), model="circle-complement", level=None
    )
    return ObstacleModel(
        N=N,
        h=h,
        centers=centers,
        eps=eps,
        alpha=alpha,
        obstacle_arcs=tuple(tuple(a) for a in arcs),
        B=B,
        complement=complement,
        x_pencil=x_pencil,
        complement_pencil=complement_pencil,
    )


def measure_smallness_delta(model: ObstacleModel) -> float:
    """Tight constant of ||f||_{L2(B)} <= delta ||f||_{H1}."""
    if not model.B:
        return 0.0
    N = model.N
    T = np.zeros((len(model.B), N))
    for r, v in enumerate(model.B):
        T[r, v] = 1.0
    G = model.x_pencil.energy_metric()
    return weighted_operator_norm(T, G, np.full(len(model.B), model.h))


def build_extension(model: ObstacleModel):
    """Gap-filling extension complement -> circle and its H1 norm.

    Kept vertices copy their value; each removed arc is filled by linear
    interpolation between its two neighbouring kept values, which is the
    discrete harmonic fill.  The reported constant is the tight H1 -> H1
    operator norm.  At a fixed radius it converges as the grid refines,
    but it is not uniform in the radius: crossing a gap of width 2 eps
    costs at least jump^2 / (2 eps) of energy for any extension whatsoever
    (series resistance), so the tight norm grows like eps^(-1/2).  That
    is special to one dimension, where a hole has positive capacity."""
    N = model.N
    pos = {v: r for r, v in enumerate(model.complement)}
    E = np.zeros((N, len(model.complement)))
    for v in model.complement:
        E[v, pos[v]] = 1.0
    for arc in model.obstacle_arcs:
        g = len(arc)
        left = (arc[0] - 1) % N
        right = (arc[-1] + 1) % N
        for i, v in enumerate(arc, start=1):
            w = i / (g + 1.0)
            E[v, pos[left]] = 1.0 - w
            E[v, pos[right]] = w
    c_ext = weighted_operator_norm(
        E, model.complement_pencil.energy_metric(), model.x_pencil.energy_metric()
    )
    return E, c_ext


def elliptic_regularity_constant(model: ObstacleModel) -> float:
    """Tight constant of ||f||_{H2} <= C ||(Lap + 1) f|| on the circle,
    with ||f||_{H2}^2 = ||f||^2 + E(f) + ||Lap f||^2.

    The graph-norm Gram K = (L+M) M^{-1} (L+M) exceeds the H2 Gram by
    exactly L, so the squared constant is 1 - min E(u)/||u||_K^2.  That
    Rayleigh quotient is evaluated as a squared singular value of
    B A^{-1} with B the weighted incidence matrix and A = M^{-1/2}(L+M),
    which keeps full absolute accuracy where the direct generalized
    eigensolve of the (condition kappa^2) pencil loses digits."""
    p = model.x_pencil
    L, M = p.L, p.M
    n = p.n
    # weighted incidence of the circle: one row per edge
    c = math.sqrt(float(n))  # sqrt of the edge conductance 1/h
    B = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        B[i, i] = c
        B[i, j] = -c
    A = (L + np.diag(M)) / np.sqrt(M)[:, None]
    try:
        G = np.linalg.solve(A.T, B.T).T
    except np.linalg.LinAlgError as e:
        raise DomainError(f"graph-norm factor is singular: {e}")
    smin = float(np.linalg.svd(G, compute_uv=False)[-1])
    return float(math.sqrt(max(1.0 - smin**2, 0.0)))


def certify_obstacle(model: ObstacleModel) -> dict:
    """Measure every constant of the obstacle closeness argument.

    J restricts to the complement, J0 extends by zero, the form-domain
    reverse map is the gap fill E.  The closeness defect is measured in
    the operator graph norm on the domain side."""
    xp, cp = model.x_pencil, model.complement_pencil
    N, nc = xp.n, cp.n
    J = np.zeros((nc, N))
    for r, v in enumerate(model.complement):
        J[r, v] = 1.0
    J0 = J.T.copy()  # zero extension; equals the weighted adjoint here
    E, c_ext = build_extension(model)
    delta = measure_smallness_delta(model)
    c_reg = elliptic_regularity_constant(model)
    Gx = xp.energy_metric()
    Gc = cp.energy_metric()

    j_norm = weighted_operator_norm(J, xp.M, cp.M)
    adjoint_defect = float(
        np.max(np.abs(J0 - (J.T * cp.M[None, :]) / xp.M[:, None]))
    )
    jjp_defect = float(np.max(np.abs(J @ J0 - np.eye(nc))))
    restriction_defect = weighted_operator_norm(np.eye(N) - J0 @ J, Gx, xp.M)
    reverse_defect = weighted_operator_norm(E - J0, Gc, xp.M)

    LM = xp.L + np.diag(xp.M)
    K = LM @ ((1.0 / xp.M)[:, None] * LM)  # graph-norm Gram of (Lap + 1)
    R = J.T @ cp.L - xp.L @ E
    closeness = bilinear_pairing_norm(R, K, Gc)
    bound = c_ext * c_reg * delta

    return {
        "N": model.N,
        "eps": model.eps,
        "alpha": model.alpha,
        "delta": delta,
        "C_ext": c_ext,
        "C_ell_reg": c_reg,
        "j_norm": j_norm,
        "adjoint_defect": adjoint_defect,
        "jjp_defect": jjp_defect,
        "restriction_defect": restriction_defect,
        "restriction_bound": delta,
        "reverse_defect": reverse_defect,
        "reverse_bound": c_ext * delta,
        "closeness": closeness,
        "closeness_bound": bound,
        "ok": (
            closeness <= bound * (1.0 + 1e-8)
            and restriction_defect <= delta * (1.0 + 1e-8)
            and reverse_defect <= c_ext * delta * (1.0 + 1e-8)
        ),
    }


def sweep_obstacle(N: int, center: int, alpha: float, eps_list) -> list:
    """Certify one obstacle at several radii; rows for the sweep CSV."""
    rows = []
    for eps in eps_list:
        model = build_obstacle_model(N, [center], eps, alpha)
        rows.append(certify_obstacle(model))
    return rows


def fit_loglog_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise DomainError("need at least two points for a slope")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("log-log slope needs positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
