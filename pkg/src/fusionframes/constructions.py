"""Operator-driven constructions and perturbation stability.

Transformed systems {(T W_i, w_i)}, basis-image and operator-image
systems, and the quantitative stability of verification under subspace
perturbations.  The implication checks here are conditional assertions:
when a hypothesis fails they report the instance as vacuous instead of
raising, so randomized sweeps can feed them arbitrary inputs and only
genuine implication violations count as failures.

Rank and surjectivity decisions use the package-wide relative singular
value threshold of 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InadmissibleError, InputError, PreconditionError
from .fusion_systems import Member, WeightedSubspaceSystem
from .kfusion import KFusionReport, kfusion_verify
from .subspaces import Subspace

_RANK_TOL = 1e-8
DEFAULT_TOL = 1e-8


def _require_operator(t, n: int, name: str = "operator") -> np.ndarray:
    t = linalg.require_square(linalg.as_matrix(t, name), name)
    if t.shape[0] != n:
        raise InputError(f"{name} is {t.shape[0]}x{t.shape[1]}, expected {n}x{n}")
    return t


def transform_system(
    system: WeightedSubspaceSystem, t, tol: float = 1e-10
) -> WeightedSubspaceSystem:
    """The system {(T W_i, w_i)}: images are re-orthonormalized, weights
    kept, and collapsed images retained as zero subspaces."""
    t = _require_operator(t, system.ambient_dim)
    return WeightedSubspaceSystem(
        [Member(m.subspace.image_under(t, tol), m.weight) for m in system.members]
    )


def _invariance_defect(system: WeightedSubspaceSystem, projector) -> float:
    """Worst column residual of projector(W_i) against W_i over members."""
    worst = 0.0
    for m in system.members:
        image = m.subspace.image_under(projector)
        if image.is_zero():
            continue
        resid = image.basis - m.subspace.basis @ (m.subspace.basis.T @ image.basis)
        worst = max(worst, float(np.sqrt((resid * resid).sum(axis=0)).max()))
    return worst


@dataclass(frozen=True)
class HypothesisCheck:
    ok: bool
    margin: float

    def to_json(self) -> dict:
        return {"ok": bool(self.ok), "margin": float(self.margin)}


@dataclass(frozen=True)
class TransformConstructReport:
    """Transformed system with predicted versus optimal bounds.

    ``predicted_*`` apply only when every hypothesis holds (commutation
    with K, invariance of each member under T+ T, surjectivity of T);
    then the optimal bounds of the transformed system must satisfy
    A_opt >= A_pred and B_opt <= B_pred up to tolerance, which is what
    ``bounds_consistent`` records.  Vacuous instances assert nothing.
    """

    transformed: WeightedSubspaceSystem
    hypotheses: dict
    vacuous: bool
    predicted_lower: float | None
    predicted_upper: float | None
    report: KFusionReport | None
    bounds_consistent: bool | None

    def to_json(self) -> dict:
        return {
            "vacuous": bool(self.vacuous),
            "hypotheses": {k: v.to_json() for k, v in self.hypotheses.items()},
            "predicted": None
            if self.predicted_lower is None
            else [float(self.predicted_lower), float(self.predicted_upper)],
            "optimal": None
            if self.report is None
            else [float(self.report.optimal_lower), float(self.report.optimal_upper)],
            "consistent": None if self.bounds_consistent is None else bool(self.bounds_consistent),
            "system": self.transformed.to_json(),
        }


def commuting_transform_construct(
    system: WeightedSubspaceSystem, k, t, tol: float = DEFAULT_TOL
) -> TransformConstructReport:
    """Transform a verified system by a surjective operator commuting with
    K whose pseudo-inverse action leaves every member invariant.

    Predicted bounds: A_pred = A / (||T||^2 ||T+||^2) and
    B_pred = B * ||T+||^2 ||T||^2, with (A, B) the optimal bounds of the
    input pair.  The input system must verify for K (PreconditionError
    otherwise).
    """
    n = system.ambient_dim
    k = _require_operator(k, n, "operator K")
    t = _require_operator(t, n, "operator T")
    base = kfusion_verify(system, k, tol)
    if not base.is_kff:
        raise PreconditionError("input system is refuted for this operator")

    norm_t = linalg.operator_norm(t)
    norm_k = linalg.operator_norm(k)
    commutator = np.linalg.norm(t @ k - k @ t)
    commute_scale = max(norm_t * norm_k, 1e-300)
    hyp_commute = HypothesisCheck(
        commutator <= tol * commute_scale, commutator / commute_scale
    )

    t_pinv = linalg.pseudo_inverse(t)
    worst = _invariance_defect(system, t_pinv @ t)
    hyp_invariant = HypothesisCheck(worst <= tol, worst)

    sv = linalg.singular_values(t)
    surjective = sv.size > 0 and sv[0] > 0 and int(np.sum(sv > _RANK_TOL * sv[0])) == n
    hyp_surjective = HypothesisCheck(surjective, float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0)

    hypotheses = {
        "commutes": hyp_commute,
        "member_invariance": hyp_invariant,
        "surjective": hyp_surjective,
    }
    transformed = transform_system(system, t)
    if not all(h.ok for h in hypotheses.values()):
        return TransformConstructReport(
            transformed, hypotheses, True, None, None, None, None
        )

    norm_t_pinv = linalg.operator_norm(t_pinv)
    a_pred = base.optimal_lower / (norm_t ** 2 * norm_t_pinv ** 2)
    b_pred = base.optimal_upper * (norm_t_pinv ** 2 * norm_t ** 2)
    report = kfusion_verify(transformed, k, tol)
    slack = tol * max(1.0, b_pred)
    consistent = (
        report.is_kff
        and report.optimal_lower >= a_pred - slack
        and report.optimal_upper <= b_pred + slack
    )
    return TransformConstructReport(
        transformed, hypotheses, False, a_pred, b_pred, report, consistent
    )


@dataclass(frozen=True)
class ConsistencyReport:
    """One sweep of an implication check between transformed-system
    verdicts and rank facts about the transforming operator."""

    branch: str
    consistent: bool | None
    verified: bool
    sigma_min_ratio: float
    details: dict

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "consistent": None if self.consistent is None else bool(self.consistent),
            "verified": bool(self.verified),
            "sigma_min_ratio": float(self.sigma_min_ratio),
            **{k: (bool(v) if isinstance(v, (bool,)) or hasattr(v, "dtype") else v)
               for k, v in self.details.items()},
        }


def surjectivity_consistency_check(
    system: WeightedSubspaceSystem, k, t, tol: float = DEFAULT_TOL
) -> ConsistencyReport:
    """For full-rank K: a verified transformed system forces T to be
    surjective.  Checks the implication both ways round (a rank-deficient
    T must yield a refutation).  Raises when K is not full rank."""
    n = system.ambient_dim
    k = _require_operator(k, n, "operator K")
    t = _require_operator(t, n, "operator T")
    if linalg.matrix_rank(k, _RANK_TOL) < n:
        raise PreconditionError("operator K must have full rank (dense range)")
    report = kfusion_verify(transform_system(system, t), k, tol)
    sv = linalg.singular_values(t)
    ratio = float(sv[-1] / sv[0]) if sv.size and sv[0] > 0 else 0.0
    surjective = sv.size > 0 and sv[0] > 0 and int(np.sum(sv > _RANK_TOL * sv[0])) == n
    if report.is_kff:
        branch = "verified-implies-surjective"
        consistent = surjective
    elif not surjective:
        branch = "rank-deficient-refuted"
        consistent = True
    else:
        branch = "vacuous"  # refuted with surjective T: implication silent
        consistent = True
    return ConsistencyReport(
        branch, consistent, report.is_kff, ratio, {"surjective": surjective}
    )


def invertibility_consistency_check(
    system: WeightedSubspaceSystem, k, t, tol: float = DEFAULT_TOL
) -> ConsistencyReport:
    """For full-rank K commuting with T: if both {(T W_i)} and {(T.T W_i)}
    verify, T must be invertible.  Hypothesis failures make the sweep
    vacuous rather than erroring."""
    n = system.ambient_dim
    k = _require_operator(k, n, "operator K")
    t = _require_operator(t, n, "operator T")
    dense = linalg.matrix_rank(k, _RANK_TOL) == n
    commutator = np.linalg.norm(t @ k - k @ t)
    scale = max(linalg.operator_norm(t) * linalg.operator_norm(k), 1e-300)
    commutes = commutator <= tol * scale
    sv = linalg.singular_values(t)
    ratio = float(sv[-1] / sv[0]) if sv.size and sv[0] > 0 else 0.0
    invertible = sv.size > 0 and sv[0] > 0 and int(np.sum(sv > _RANK_TOL * sv[0])) == n
    if not (dense and commutes):
        return ConsistencyReport(
            "vacuous-hypotheses",
            None,
            False,
            ratio,
            {"dense_range": dense, "commutes": commutes, "invertible": invertible},
        )
    rep_fwd = kfusion_verify(transform_system(system, t), k, tol)
    rep_adj = kfusion_verify(transform_system(system, t.T), k, tol)
    both = rep_fwd.is_kff and rep_adj.is_kff
    if both:
        branch = "both-verified"
        consistent = invertible
    elif not invertible:
        branch = "singular-refuted"
        consistent = True
    else:
        branch = "vacuous"
        consistent = True
    return ConsistencyReport(
        branch,
        consistent,
        both,
        ratio,
        {
            "forward_verified": rep_fwd.is_kff,
            "adjoint_verified": rep_adj.is_kff,
            "invertible": invertible,
        },
    )


def basis_image_system(k, tol: float = 1e-10):
    """The system {(span(K e_i), 1)} over the standard basis columns of K,
    with collapsed columns kept as zero subspaces.  Always verifies for K
    since the spans jointly carry the whole range of K; the verification
    report is returned alongside the system."""
    k = linalg.require_square(linalg.as_matrix(k, "operator K"))
    n = k.shape[0]
    members = [
        Member(Subspace.from_spanning(k[:, [i]], tol), 1.0) for i in range(n)
    ]
    system = WeightedSubspaceSystem(members)
    report = kfusion_verify(system, k)
    return system, report


@dataclass(frozen=True)
class ImageConstructReport:
    transformed: WeightedSubspaceSystem
    hypothesis_ok: bool
    hypothesis_margin: float
    report: KFusionReport
    consistent: bool | None  # None when the invariance hypothesis fails

    def to_json(self) -> dict:
        return {
            "hypothesis_ok": bool(self.hypothesis_ok),
            "hypothesis_margin": float(self.hypothesis_margin),
            "verified": bool(self.report.is_kff),
            "consistent": None if self.consistent is None else bool(self.consistent),
            "report": self.report.to_json(),
            "system": self.transformed.to_json(),
        }


def operator_image_construct(
    system: WeightedSubspaceSystem, k, tol: float = DEFAULT_TOL
) -> ImageConstructReport:
    """Image construction {(K W_i, w_i)} from a genuine fusion frame whose
    members are invariant under K+ K.  The constructed system is asserted
    to verify for K; hypothesis failure downgrades the report to vacuous.
    Raises PreconditionError when the input is not a fusion frame."""
    n = system.ambient_dim
    k = _require_operator(k, n, "operator K")
    bounds = system.fusion_bounds()
    if bounds.lower <= tol * max(bounds.upper, 1e-300):
        raise PreconditionError("input system is not a fusion frame (singular frame operator)")
    worst = _invariance_defect(system, linalg.pseudo_inverse(k) @ k)
    hypothesis_ok = worst <= tol
    transformed = transform_system(system, k)
    report = kfusion_verify(transformed, k, tol)
    consistent = report.is_kff if hypothesis_ok else None
    return ImageConstructReport(transformed, hypothesis_ok, worst, report, consistent)


# ---------------------------------------------------------------------------
# Perturbation stability


@dataclass(frozen=True)
class PerturbationParams:
    """Constants (lambda1, lambda2, mu) of the perturbation hypothesis

        (sum w_i^2 ||(P_i - Q_i) f||^2)^(1/2)
            <= lambda1 * ||analysis_W f|| + lambda2 * ||analysis_V f||
               + mu * ||K.T f||.

    Admissible against a lower bound A when
    max(lambda1 + mu / sqrt(A), lambda2) < 1.
    """

    lambda1: float
    lambda2: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "mu"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"{name} must be finite and >= 0, got {v}")

    def admissible(self, lower: float) -> bool:
        if lower <= 0:
            return False
        return max(self.lambda1 + self.mu / math.sqrt(lower), self.lambda2) < 1.0

    def to_json(self) -> dict:
        return {"lambda1": float(self.lambda1), "lambda2": float(self.lambda2), "mu": float(self.mu)}


def perturbation_predict(lower: float, upper: float, params: PerturbationParams):
    """Guaranteed bounds of the perturbed system:

        A' = A (1 - r / (1 + lambda2))^2,  B' = B (1 + r / (1 - lambda2))^2

    with r = lambda1 + lambda2 + mu / sqrt(A).  Raises InadmissibleError
    when max(lambda1 + mu / sqrt(A), lambda2) >= 1.

    (lower, upper) must be a definitional pair with lower <= upper.  Note
    that the OPTIMAL constants of an operator-relative verification can
    come out reversed when the operator has small norm (any lower bound
    up to ||K||^-2 upper is valid then); pass min(A_opt, B_opt) as the
    lower bound in that case, which is what the CLI does.
    """
    if not (math.isfinite(lower) and math.isfinite(upper)) or not (0 < lower <= upper):
        raise InputError(f"bounds must satisfy 0 < lower <= upper, got ({lower}, {upper})")
    if not params.admissible(lower):
        raise InadmissibleError(
            f"max(lambda1 + mu/sqrt(A), lambda2) = "
            f"{max(params.lambda1 + params.mu / math.sqrt(lower), params.lambda2):.6g} "
            ">= 1"
        )
    r = params.lambda1 + params.lambda2 + params.mu / math.sqrt(lower)
    a_new = lower * (1.0 - r / (1.0 + params.lambda2)) ** 2
    b_new = upper * (1.0 + r / (1.0 - params.lambda2)) ** 2
    return a_new, b_new


def perturbation_estimate(
    system: WeightedSubspaceSystem,
    perturbed: WeightedSubspaceSystem,
    tol: float = 1e-9,
) -> PerturbationParams:
    """Smallest lambda1 (with lambda2 = mu = 0) making the hypothesis hold
    for every f: the square root of the largest eigenvalue of
    S^(-1/2) D S^(-1/2), D = sum w_i^2 (P_i - Q_i)^2.

    Requires matching shapes and weights and an invertible frame operator
    on the reference side.
    """
    if perturbed.ambient_dim != system.ambient_dim:
        raise InputError("ambient dimensions differ")
    if len(perturbed) != len(system):
        raise InputError("member counts differ")
    w1 = system.weights
    w2 = perturbed.weights
    if not np.allclose(w1, w2, rtol=1e-12, atol=0.0):
        raise InputError("weights differ between the two systems")
    s = system.frame_operator()
    spec = linalg.sym_eig(s)
    if spec.smallest <= tol * max(spec.largest, 1e-300):
        raise PreconditionError("reference frame operator is singular")
    d = np.zeros_like(s)
    for m, m2 in zip(system.members, perturbed.members):
        delta = m.subspace.projection() - m2.subspace.projection()
        d += (m.weight ** 2) * (delta @ delta)
    inv_root = (spec.eigenvectors / np.sqrt(spec.eigenvalues)) @ spec.eigenvectors.T
    mid = inv_root @ d @ inv_root
    lam = max(linalg.sym_eig(0.5 * (mid + mid.T)).largest, 0.0)
    return PerturbationParams(math.sqrt(lam))
