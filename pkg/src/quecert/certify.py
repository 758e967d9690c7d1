"""Closeness certification of identification pairs.

Every inequality defining quasi-unitary equivalence gets its tight
constant, computed as the extremal eigenvalue of a symmetric-definite
pencil; the certificate combines them into a headline delta_total and
compares against the model's proven rate.  Also here: the form/operator
conversion formulas, transitive composition, the operator-level report,
and the convergence verdict over a certificate sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NumericsError
from .identify import IdentificationPair, weighted_adjoint
from .models import by_name


def _as_metric(M, n: int, what: str):
    M = np.asarray(M)
    if M.ndim == 1:
        if M.shape[0] != n:
            raise DomainError(f"{what} metric has size {M.shape[0]}, need {n}")
        if np.any(M <= 0):
            raise DomainError(f"{what} metric is not positive")
        return M
    if M.ndim == 2:
        if M.shape != (n, n):
            raise DomainError(f"{what} metric has shape {M.shape}, need ({n},{n})")
        if not np.allclose(M, M.T, rtol=1e-12, atol=1e-13):
            raise DomainError(f"{what} metric is not symmetric")
        return M
    raise DomainError(f"{what} metric must be a vector or a square matrix")


def _top_eig(B: np.ndarray, metric) -> float:
    """Largest eigenvalue of B v = lambda G v for Hermitian B, SPD G."""
    n = B.shape[0]
    B = (B + B.conj().T) / 2.0
    try:
        if metric.ndim == 1:
            d = np.sqrt(metric)
            C = B / d[:, None] / d[None, :]
            lam = sla.eigvalsh(C, subset_by_index=[n - 1, n - 1])
        else:
            lam = sla.eigh(
                B, metric, eigvals_only=True, subset_by_index=[n - 1, n - 1]
            )
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise DomainError(f"metric not positive definite: {e}")
    return float(np.real(lam[0]))


def weighted_operator_norm(A, M_dom, M_cod) -> float:
    """sup ||A f||_cod / ||f||_dom over f != 0.

    Metrics are diagonal (1-D array of weights) or dense SPD matrices;
    either side may be an energy metric diag(M) + L.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise DomainError("operator must be a matrix")
    p, n = A.shape
    dom = _as_metric(M_dom, n, "domain")
    cod = _as_metric(M_cod, p, "codomain")
    if cod.ndim == 1:
        B = A.conj().T @ (cod[:, None] * A)
    else:
        B = A.conj().T @ cod @ A
    return math.sqrt(max(_top_eig(B, dom), 0.0))


def _metric_solve(G, B):
    if G.ndim == 1:
        return B / G[:, None]
    try:
        return sla.solve(G, B, assume_a="pos")
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise DomainError(f"metric not positive definite: {e}")


def bilinear_pairing_norm(C, G_left, G_right) -> float:
    """sup |f^T C u| / (||f||_Gl ||u||_Gr): tight constant of a bilinear
    estimate.  Reduces over the smaller of the two sides."""
    C = np.asarray(C)
    p, q = C.shape
    Gl = _as_metric(G_left, p, "left")
    Gr = _as_metric(G_right, q, "right")
    if p <= q:
        B = C @ _metric_solve(Gr, C.conj().T)
        lam = _top_eig(B, Gl)
    else:
        B = C.conj().T @ _metric_solve(Gl, C)
        lam = _top_eig(B, Gr)
    return math.sqrt(max(lam, 0.0))


@dataclass(eq=False)
class QueCertificate:
    """Tight per-inequality constants for one coarse/fine pair."""

    model: str
    m: int
    M: int
    delta_a1: float  # excess of ||J|| over 1
    delta_a2: float  # ||J* - Jp||
    delta_b1: float  # sup ||f - Jp J f|| / ||f||_E
    delta_b2: float  # sup ||u - J Jp u|| / ||u||_E~
    delta_bprime: float  # sup ||u - J Jp1 u|| / ||u||_E~
    delta_c1: float  # sup ||(J1 - J) f|| / ||f||_E
    delta_c2: float  # sup ||(Jp1 - Jp) u|| / ||u||_E~
    delta_d: float  # tight constant of the bilinear closeness estimate
    delta_total: float
    theory_bound: float  # proven rate for this model and coarse level
    energy_bound_J: float  # sup ||J f||_E~ / ||f||_E
    energy_bound_Jp1: float  # sup ||Jp1 u||_E / ||u||_E~
    hypothesis_flags: dict

    def to_json(self) -> dict:
        return {
            "schema": "que-cert/1",
            "model": self.model,
            "m": self.m,
            "M": self.M,
            "deltas": {
                "delta_a1": self.delta_a1,
                "delta_a2": self.delta_a2,
                "delta_b1": self.delta_b1,
                "delta_b2": self.delta_b2,
                "delta_bprime": self.delta_bprime,
                "delta_c1": self.delta_c1,
                "delta_c2": self.delta_c2,
                "delta_d": self.delta_d,
                "energy_bound_J": self.energy_bound_J,
                "energy_bound_Jp1": self.energy_bound_Jp1,
            },
            "delta_total": self.delta_total,
            "paper_bound": self.theory_bound,
            "hypothesis_flags": dict(self.hypothesis_flags),
        }


def certificate_from_json(doc: dict) -> QueCertificate:
    if doc.get("schema") != "que-cert/1":
        raise DomainError(f"unsupported schema {doc.get('schema')!r}")
    d = doc["deltas"]
    return QueCertificate(
        model=doc["model"],
        m=int(doc["m"]),
        M=int(doc["M"]),
        delta_a1=d["delta_a1"],
        delta_a2=d["delta_a2"],
        delta_b1=d["delta_b1"],
        delta_b2=d["delta_b2"],
        delta_bprime=d["delta_bprime"],
        delta_c1=d["delta_c1"],
        delta_c2=d["delta_c2"],
        delta_d=d["delta_d"],
        delta_total=doc["delta_total"],
        theory_bound=doc["paper_bound"],
        energy_bound_J=d["energy_bound_J"],
        energy_bound_Jp1=d["energy_bound_Jp1"],
        hypothesis_flags=dict(doc.get("hypothesis_flags", {})),
    )


def combine_lemma_b(delta_bprime: float, delta_a: float, delta_c: float) -> float:
    """Recover the second closeness inequality from the primed variant:
    delta = delta' + (1 + delta_a) delta_c."""
    if min(delta_bprime, delta_a, delta_c) < 0:
        raise DomainError("deltas must be nonnegative")
    return delta_bprime + (1.0 + delta_a) * delta_c


def certify(pair: IdentificationPair) -> QueCertificate:
    """Measure every closeness constant of the pair.

    Plain weighted l2 metrics for the map bounds, energy metrics
    diag(M) + L on the domain side of the contraction and compatibility
    inequalities; the headline combines the primed route."""
    cp, fp = pair.coarse, pair.fine
    J, Jp, S = pair.J, pair.Jp, pair.Jp1
    Mm, MM = cp.M, fp.M
    Gm, GM = cp.energy_metric(), fp.energy_metric()

    delta_a1 = max(0.0, weighted_operator_norm(J, Mm, MM) - 1.0)
    delta_a2 = weighted_operator_norm(
        Jp - weighted_adjoint(J, Mm, MM), MM, Mm
    )
    delta_b1 = weighted_operator_norm(np.eye(cp.n) - Jp @ J, Gm, Mm)
    delta_b2 = weighted_operator_norm(np.eye(fp.n) - J @ Jp, GM, MM)
    delta_bprime = weighted_operator_norm(np.eye(fp.n) - J @ S, GM, MM)
    delta_c1 = weighted_operator_norm(pair.J1 - J, Gm, MM)
    delta_c2 = weighted_operator_norm(S - Jp, GM, Mm)
    delta_d = bilinear_pairing_norm(J.T @ fp.L - cp.L @ S, Gm, GM)
    energy_bound_J = weighted_operator_norm(J, Gm, GM)
    energy_bound_Jp1 = weighted_operator_norm(S, GM, Gm)

    delta_total = max(
        delta_a1,
        delta_a2,
        delta_b1,
        combine_lemma_b(delta_bprime, delta_a1, delta_c2),
        delta_c1,
        delta_c2,
        delta_d,
    )
    model = by_name(cp.model)
    flags = {
        "adjoint_exact": delta_a2 <= 1e-12,
        "form_prolongation_is_j": delta_c1 <= 1e-12,
        "energy_bound_forward_ok": energy_bound_J <= 1.0 + delta_total + 1e-10,
        "energy_bound_reverse_ok": energy_bound_Jp1 <= 1.0 + delta_total + 1e-10,
    }
    return QueCertificate(
        model=cp.model,
        m=cp.level,
        M=fp.level,
        delta_a1=delta_a1,
        delta_a2=delta_a2,
        delta_b1=delta_b1,
        delta_b2=delta_b2,
        delta_bprime=delta_bprime,
        delta_c1=delta_c1,
        delta_c2=delta_c2,
        delta_d=delta_d,
        delta_total=delta_total,
        theory_bound=model.theory_delta(cp.level),
        energy_bound_J=energy_bound_J,
        energy_bound_Jp1=energy_bound_Jp1,
        hypothesis_flags=flags,
    )


def delta_hat_from_delta(delta: float) -> float:
    """Operator-level defect from the form-level one."""
    if not 0.0 <= delta < 2.0:
        raise DomainError("conversion valid for 0 <= delta < 2")
    return delta * math.sqrt((2.0 + delta) / (2.0 - delta))


def delta_from_delta_hat(delta_hat: float) -> float:
    """Form-level defect from the operator-level one."""
    if not 0.0 <= delta_hat < 1.0:
        raise DomainError("conversion valid for 0 <= delta_hat < 1")
    return delta_hat / math.sqrt(1.0 - delta_hat)


def operator_transitivity_bound(delta: float, delta_tilde: float) -> float:
    """Defect of a composed pair at operator level: 5 delta + 5 delta~."""
    for d in (delta, delta_tilde):
        if not 0.0 <= d <= 1.0:
            raise DomainError("transitivity assumes deltas in [0, 1]")
    return 5.0 * delta + 5.0 * delta_tilde


def form_transitivity_bound(delta: float, delta_tilde: float) -> float:
    """Defect of a composed pair at form level: 14 (delta + delta~)."""
    for d in (delta, delta_tilde):
        if not 0.0 <= d <= 1.0:
            raise DomainError("transitivity assumes deltas in [0, 1]")
    return 14.0 * (delta + delta_tilde)


def compose(
    pair_ab: IdentificationPair,
    cert_ab: QueCertificate,
    pair_bc: IdentificationPair,
    cert_bc: QueCertificate,
):
    """Chain two certified pairs m -> k -> M.

    Returns the composed pair, the theoretical bound 14 (delta + delta~)
    and a fresh certificate of the composition.  Hypothesis flags record
    whether the energy bounds of the two factors hold at their deltas.
    """
    if pair_ab.fine.n != pair_bc.coarse.n:
        raise DomainError(
            f"cannot chain: middle spaces have sizes {pair_ab.fine.n} "
            f"and {pair_bc.coarse.n}"
        )
    bound = form_transitivity_bound(cert_ab.delta_total, cert_bc.delta_total)

    composed = IdentificationPair(
        coarse=pair_ab.coarse,
        fine=pair_bc.fine,
        J=pair_bc.J @ pair_ab.J,
        Jp=pair_ab.Jp @ pair_bc.Jp,
        Jp1=pair_ab.Jp1 @ pair_bc.Jp1,
        coarse_indices=tuple(
            pair_bc.coarse_indices[r] for r in pair_ab.coarse_indices
        ),
    )
    cert = certify(composed)
    cert.hypothesis_flags.update(
        {
            "factor_energy_bound_forward_ok": cert_ab.energy_bound_J
            <= 1.0 + cert_ab.delta_total + 1e-10,
            "factor_energy_bound_reverse_ok": cert_bc.energy_bound_Jp1
            <= 1.0 + cert_bc.delta_total + 1e-10,
            "compose_bound_ok": cert.delta_total <= bound * (1.0 + 1e-8),
        }
    )
    return composed, bound, cert


def operator_level_certificate(pair: IdentificationPair, cert: QueCertificate) -> dict:
    """Operator-side consequences of a form certificate: the resolvent
    commutator at the base point against 4 delta, and the adjoint norm
    against 1 + 2 delta."""
    cp, fp = pair.coarse, pair.fine
    try:
        Rc = sla.solve(cp.L + np.diag(cp.M), np.diag(cp.M), assume_a="pos")
        RJ = sla.solve(fp.L + np.diag(fp.M), fp.M[:, None] * pair.J, assume_a="pos")
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise NumericsError(f"resolvent solve failed: {e}")
    D = RJ - pair.J @ Rc
    res_norm = weighted_operator_norm(D, cp.M, fp.M)
    jp_norm = weighted_operator_norm(pair.Jp, fp.M, cp.M)
    res_bound = 4.0 * cert.delta_total
    jp_bound = 1.0 + 2.0 * cert.delta_total
    return {
        "resolvent_norm": res_norm,
        "resolvent_bound": res_bound,
        "resolvent_ok": res_norm <= res_bound * (1.0 + 1e-8),
        "jp_norm": jp_norm,
        "jp_bound": jp_bound,
        "jp_ok": jp_norm <= jp_bound * (1.0 + 1e-8),
    }


def gnrs_verdict(certificates) -> dict:
    """Convergence verdict over certificates at increasing coarse level.

    Reports the delta sequence, a least-squares slope of log delta per
    level (in the model's natural base: 2 for the interval, 5 for the
    gasket), the per-entry comparison against the proven rate, and
    whether the sequence is eventually (strictly) decreasing."""
    certs = list(certificates)
    if len(certs) < 3:
        raise DomainError("need at least 3 certificates for a verdict")
    models = {c.model for c in certs}
    if len(models) != 1:
        raise DomainError("certificates mix models")
    ms = [c.m for c in certs]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise DomainError("certificates must come at strictly increasing m")

    deltas = [c.delta_total for c in certs]
    base = 2.0 if certs[0].model == "interval" else 5.0
    if all(d > 0 for d in deltas):
        coeff = np.polyfit(ms, np.log(deltas), 1)
        slope = float(coeff[0] / math.log(base))
    else:
        slope = float("nan")
    tail = deltas[-3:]
    decreasing = all(a > b for a, b in zip(tail, tail[1:]))
    return {
        "model": certs[0].model,
        "levels": ms,
        "deltas": deltas,
        "theory_bounds": [c.theory_bound for c in certs],
        "within_bound": [
            c.delta_total <= c.theory_bound * (1.0 + 1e-8) for c in certs
        ],
        "base": base,
        "slope": slope,
        "eventually_decreasing": decreasing,
        "verdict": (
            "converges in generalised norm resolvent sense"
            if decreasing
            else "no convergence verdict"
        ),
    }
