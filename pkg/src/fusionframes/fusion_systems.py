"""Weighted subspace systems and their frame calculus.

A system is a finite ordered family {(W_i, w_i)} of subspaces of R^n with
positive weights.  Its representation space consists of block vectors
{a_i} with a_i in W_i and squared norm sum ||a_i||^2.  The three associated
operators are

* analysis:   f |-> {w_i P_i f}        (P_i = projection onto W_i),
* synthesis:  {a_i} |-> sum_i w_i a_i  (the adjoint of analysis),
* frame operator: S = sum_i w_i^2 P_i  (symmetric PSD).

In finite dimension the optimal frame bounds are exactly the extremal
eigenvalues of S, so verdicts are decided spectrally.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InputError
from .subspaces import Subspace

DEFAULT_VERDICT_TOL = 1e-9
_BLOCK_TOL = 1e-9


class Verdict(enum.Enum):
    """Classification of a bounds report.

    Every finite system has a finite upper bound, so there is no
    "not Bessel" outcome; BESSEL_ONLY marks a vanishing lower bound.
    """

    BESSEL_ONLY = "BesselOnly"
    FRAME = "Frame"
    TIGHT = "Tight"
    PARSEVAL = "Parseval"

    def is_frame(self) -> bool:
        return self is not Verdict.BESSEL_ONLY


@dataclass(frozen=True)
class BoundsReport:
    verdict: Verdict
    lower: float
    upper: float

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "lower": float(self.lower), "upper": float(self.upper)}


def classify_bounds(lower: float, upper: float, tol: float) -> BoundsReport:
    """Spectral verdict from extremal eigenvalues of a frame operator.

    Parseval needs both bounds within ``tol`` of 1; tight needs a relative
    spread below ``tol``; frame needs lower > tol * upper (relative, so the
    verdict is invariant under weight scaling).
    """
    lower = max(float(lower), 0.0)
    upper = max(float(upper), 0.0)
    if upper == 0.0:
        return BoundsReport(Verdict.BESSEL_ONLY, 0.0, 0.0)
    if abs(lower - 1.0) <= tol and abs(upper - 1.0) <= tol:
        verdict = Verdict.PARSEVAL
    elif upper - lower <= tol * upper and lower > tol * upper:
        verdict = Verdict.TIGHT
    elif lower > tol * upper:
        verdict = Verdict.FRAME
    else:
        verdict = Verdict.BESSEL_ONLY
    return BoundsReport(verdict, lower, upper)


@dataclass(frozen=True)
class Member:
    """One weighted subspace, optionally carrying a local spanning family."""

    subspace: Subspace
    weight: float
    local_frame: tuple = ()  # tuple of ambient vectors inside the subspace


class CoefficientBundle:
    """Element of the representation space: one block per member, block i
    lying in W_i."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        blocks = tuple(linalg.as_vector(b, "bundle block") for b in blocks)
        if not blocks:
            raise InputError("a bundle needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, *_):
        raise AttributeError("CoefficientBundle is immutable")

    def __len__(self):
        return len(self.blocks)

    def norm(self) -> float:
        return math.sqrt(sum(float(b @ b) for b in self.blocks))

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def to_json(self) -> dict:
        return {"blocks": [[float(x) for x in b] for b in self.blocks]}


class WeightedSubspaceSystem:
    """Finite family {(W_i, w_i)} over a common ambient space."""

    __slots__ = ("ambient_dim", "members", "_frame_op", "_synth")

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise InputError("a system needs at least one member")
        norm_members = []
        ambient = None
        for i, m in enumerate(members):
            if not isinstance(m, Member):
                sub, w = m  # allow bare (subspace, weight) pairs
                m = Member(sub, w)
            if not isinstance(m.subspace, Subspace):
                raise InputError(f"member {i}: subspace expected")
            w = float(m.weight)
            if not math.isfinite(w) or w <= 0:
                raise InputError(f"member {i}: weight must be positive and finite, got {w}")
            if ambient is None:
                ambient = m.subspace.ambient_dim
            elif m.subspace.ambient_dim != ambient:
                raise InputError(
                    f"member {i}: ambient dimension {m.subspace.ambient_dim} "
                    f"differs from {ambient}"
                )
            norm_members.append(Member(m.subspace, w, tuple(m.local_frame)))
        object.__setattr__(self, "ambient_dim", ambient)
        object.__setattr__(self, "members", tuple(norm_members))
        object.__setattr__(self, "_frame_op", None)
        object.__setattr__(self, "_synth", None)

    def __setattr__(self, *_):
        raise AttributeError("WeightedSubspaceSystem is immutable")

    def __len__(self):
        return len(self.members)

    @property
    def subspaces(self):
        return tuple(m.subspace for m in self.members)

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.members])

    def has_local_frames(self) -> bool:
        return any(m.local_frame for m in self.members)

    # operators -------------------------------------------------------------

    def analysis(self, f) -> CoefficientBundle:
        """{w_i P_i f}: block i is the weighted projection of f onto W_i."""
        f = linalg.as_vector(f)
        if f.shape[0] != self.ambient_dim:
            raise InputError(
                f"vector has dimension {f.shape[0]}, expected {self.ambient_dim}"
            )
        return CoefficientBundle(
            [m.weight * m.subspace.project(f) for m in self.members]
        )

    def synthesis(self, bundle: CoefficientBundle) -> np.ndarray:
        """sum_i w_i a_i for a bundle shaped like this system."""
        if not isinstance(bundle, CoefficientBundle):
            raise InputError("synthesis expects a CoefficientBundle")
        if len(bundle) != len(self.members):
            raise InputError(
                f"bundle has {len(bundle)} blocks, system has {len(self.members)}"
            )
        out = np.zeros(self.ambient_dim)
        for m, block in zip(self.members, bundle.blocks):
            if block.shape[0] != self.ambient_dim:
                raise InputError(
                    f"bundle block has dimension {block.shape[0]}, "
                    f"expected {self.ambient_dim}"
                )
            out += m.weight * block
        return out

    def check_bundle(self, bundle: CoefficientBundle, tol: float = _BLOCK_TOL) -> None:
        """Validate the membership invariant a_i in W_i (relative tol)."""
        if len(bundle) != len(self.members):
            raise InputError("bundle shape does not match the system")
        for i, (m, block) in enumerate(zip(self.members, bundle.blocks)):
            nb = np.linalg.norm(block)
            if nb == 0.0:
                continue
            resid = np.linalg.norm(block - m.subspace.project(block))
            if resid > tol * nb:
                raise InputError(
                    f"bundle block {i} is outside its subspace "
                    f"(relative residual {resid / nb:.3e})"
                )

    def frame_operator(self) -> np.ndarray:
        """S = sum_i w_i^2 P_i, symmetric PSD."""
        if self._frame_op is None:
            s = np.zeros((self.ambient_dim, self.ambient_dim))
            for m in self.members:
                s += (m.weight ** 2) * m.subspace.projection()
            object.__setattr__(self, "_frame_op", 0.5 * (s + s.T))
        return self._frame_op

    def synthesis_matrix(self) -> np.ndarray:
        """The synthesis operator on stacked ambient blocks: the n x (m*n)
        matrix [w_1 P_1, ..., w_m P_m].  Restricted to block vectors with
        a_i in W_i it acts as sum_i w_i a_i, and its minimal-norm preimages
        automatically have blocks inside the W_i."""
        if self._synth is None:
            n = self.ambient_dim
            t = np.hstack([m.weight * m.subspace.projection() for m in self.members])
            object.__setattr__(self, "_synth", t)
        return self._synth

    def split_blocks(self, stacked) -> list:
        stacked = linalg.as_vector(stacked, "stacked blocks")
        n = self.ambient_dim
        if stacked.shape[0] != n * len(self.members):
            raise InputError("stacked block vector has the wrong length")
        return [stacked[i * n : (i + 1) * n] for i in range(len(self.members))]

    def fusion_bounds(self, tol: float = DEFAULT_VERDICT_TOL) -> BoundsReport:
        """Optimal bounds = extremal eigenvalues of the frame operator."""
        if tol <= 0:
            raise InputError("tol must be positive")
        spec = linalg.sym_eig(self.frame_operator())
        return classify_bounds(spec.smallest, spec.largest, tol)

    def scaled(self, c: float) -> "WeightedSubspaceSystem":
        """The same subspaces with every weight multiplied by c > 0."""
        if c <= 0:
            raise InputError("scale factor must be positive")
        return WeightedSubspaceSystem(
            [Member(m.subspace, c * m.weight, m.local_frame) for m in self.members]
        )

    def __repr__(self):
        dims = ",".join(str(m.subspace.dim) for m in self.members)
        return f"WeightedSubspaceSystem(n={self.ambient_dim}, dims=[{dims}])"

    # wire format ------------------------------------------------------------

    def to_json(self) -> dict:
        members = []
        for m in self.members:
            entry = {
                "basis": linalg.matrix_to_json(m.subspace.basis),
                "weight": float(m.weight),
            }
            if m.local_frame:
                entry["local_frame"] = [[float(x) for x in v] for v in m.local_frame]
            members.append(entry)
        return {"ambient_dim": self.ambient_dim, "members": members}

    @classmethod
    def from_json(cls, obj, name: str = "system") -> "WeightedSubspaceSystem":
        if not isinstance(obj, dict):
            raise InputError(f"{name}: expected an object")
        for key in ("ambient_dim", "members"):
            if key not in obj:
                raise InputError(f"{name}: missing field '{key}'")
        n = obj["ambient_dim"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InputError(f"{name}.ambient_dim: expected a positive integer, got {n!r}")
        raw_members = obj["members"]
        if not isinstance(raw_members, list) or not raw_members:
            raise InputError(f"{name}.members: expected a non-empty list")
        members = []
        for i, entry in enumerate(raw_members):
            where = f"{name}.members[{i}]"
            if not isinstance(entry, dict):
                raise InputError(f"{where}: expected an object")
            if "basis" not in entry:
                raise InputError(f"{where}: missing field 'basis'")
            basis = linalg.matrix_from_json(entry["basis"], f"{where}.basis", min_cols=0)
            if basis.shape[0] != n:
                raise InputError(
                    f"{where}.basis: has {basis.shape[0]} rows, expected {n}"
                )
            sub = Subspace.from_spanning(basis, ambient_dim=n)
            if "weight" not in entry:
                raise InputError(f"{where}: missing field 'weight'")
            w = entry["weight"]
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise InputError(f"{where}.weight: expected a positive real, got {w!r}")
            local = []
            if "local_frame" in entry:
                raw_local = entry["local_frame"]
                if not isinstance(raw_local, list):
                    raise InputError(f"{where}.local_frame: expected a list of vectors")
                for j, vec in enumerate(raw_local):
                    if not isinstance(vec, list) or len(vec) != n:
                        raise InputError(
                            f"{where}.local_frame[{j}]: expected a length-{n} vector"
                        )
                    for x in vec:
                        if isinstance(x, bool) or not isinstance(x, (int, float)) \
                                or not math.isfinite(x):
                            raise InputError(
                                f"{where}.local_frame[{j}]: entries must be finite reals"
                            )
                    local.append(np.array(vec, dtype=float))
            members.append(Member(sub, w, tuple(local)))
        return cls(members)


def coordinate_lines(n: int, weights=None) -> WeightedSubspaceSystem:
    """The system of coordinate axes of R^n (Parseval with unit weights)."""
    if weights is None:
        weights = [1.0] * n
    eye = np.eye(n)
    return WeightedSubspaceSystem(
        [Member(Subspace(n, eye[:, [i]], _trusted=True), w) for i, w in zip(range(n), weights)]
    )
