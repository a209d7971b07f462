"""Seeded, reproducible random instances for property suites and the CLI.

The whole point of this module is portability: an instance is a pure
function of its 64-bit seed, reproducible bit-for-bit by any
implementation of the update equations below, with no dependence on
platform RNG libraries.

PRNG contract
-------------
State: one unsigned 64-bit integer ``s``, never zero.  All arithmetic is
modulo 2^64.

Seeding (splitmix64): starting from ``z = seed``, repeat

    z = z + 0x9E3779B97F4A7C15
    x = z;  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB
    x = x ^ (x >> 31)

until ``x != 0`` and take ``s = x`` (the first output is nonzero for all
but one seed, so this is effectively a single step).

Stream (xorshift64*): each draw updates

    s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27

and outputs ``u = s * 2685821657736338717``.

Derived values:

* uniform in [0, 1):  (u >> 11) * 2^-53
* standard normal: Marsaglia polar method on pairs of uniforms
  (x = 2 u1 - 1, y = 2 u2 - 1, accept when 0 < x^2 + y^2 < 1, output
  x * m then y * m with m = sqrt(-2 ln(r2) / r2); the second variate is
  cached and emitted before any new uniforms are drawn)
* integer in [lo, hi]: lo + (u mod (hi - lo + 1))
* matrix of normals: filled row-major
* substream i: a fresh generator whose seed is the first splitmix64
  output starting from z = seed + i * 0x9E3779B97F4A7C15 (all modulo
  2^64); substreams are independent streams for parallel trials.

Instance recipes (see ``generate``) consume draws in a fixed documented
order, so flavors are reproducible across versions and languages.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, linalg
from .errors import InputError
from .fusion_systems import Member, WeightedSubspaceSystem
from .subspaces import Subspace

_U64_MAX = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15


class Rng:
    """xorshift64* stream with splitmix64 seeding (see module docstring)."""

    __slots__ = ("seed", "_state", "_have_spare", "_spare")

    def __init__(self, seed: int):
        if not isinstance(seed, int) or isinstance(seed, bool) or not (
            0 <= seed <= _U64_MAX
        ):
            raise InputError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = seed
        z = np.uint64(seed)
        out = np.uint64(0)
        while True:
            out, z = _kernels.splitmix64(z)
            z = np.uint64(z)
            if int(out) != 0:
                break
        self._state = np.uint64(out)
        self._have_spare = False
        self._spare = 0.0

    def u64(self) -> int:
        buf = np.empty(1, dtype=np.uint64)
        self._state = np.uint64(_kernels.fill_u64(self._state, buf))
        return int(buf[0])

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        buf = np.empty(1)
        self._state = np.uint64(_kernels.fill_uniforms(self._state, buf))
        return lo + (hi - lo) * float(buf[0])

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def normals(self, *shape) -> np.ndarray:
        out = np.empty(shape if shape else (1,))
        flat = out.reshape(-1)
        state, self._have_spare, self._spare = _kernels.fill_normals(
            self._state, flat, self._have_spare, self._spare
        )
        self._state = np.uint64(state)
        return out

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi] (modulo draw)."""
        if hi < lo:
            raise InputError(f"empty integer range [{lo}, {hi}]")
        return lo + self.u64() % (hi - lo + 1)

    def spawn(self, index: int) -> "Rng":
        """Independent substream number ``index`` (see module docstring)."""
        if index < 0:
            raise InputError("substream index must be non-negative")
        z = np.uint64((self.seed + index * _SM_GAMMA) & _U64_MAX)
        out, _ = _kernels.splitmix64(z)
        return Rng(int(out))


class Flavor(enum.Enum):
    """What the generated instance guarantees.

    * ARBITRARY: nothing beyond type invariants.
    * FUSION_FRAME: the subspaces jointly span, so the system is a frame.
    * K_FUSION_FRAME: also returns an operator K that factors through the
      square root of the frame operator, hence always verifies.
    * IMAGE_COMPATIBLE: returns a full-rank K and subspaces drawn inside
      the row space of K, so K+ K acts as the identity on every member and
      image constructions apply.
    """

    ARBITRARY = "arbitrary"
    FUSION_FRAME = "fusion-frame"
    K_FUSION_FRAME = "k-fusion-frame"
    IMAGE_COMPATIBLE = "image-compatible"


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one reproducible instance."""

    seed: int
    ambient_dim: int = 8
    member_count: int = 4
    dim_range: tuple = ()
    weight_range: tuple = (0.5, 2.0)
    flavor: Flavor = Flavor.ARBITRARY

    def resolved_dim_range(self) -> tuple:
        if self.dim_range:
            return tuple(self.dim_range)
        return (1, max(1, self.ambient_dim // 2))

    def validate(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (
            0 <= self.seed <= _U64_MAX
        ):
            raise InputError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        n = self.ambient_dim
        if not isinstance(n, int) or n < 2:
            raise InputError(f"ambient_dim must be an integer >= 2, got {n!r}")
        m = self.member_count
        if not isinstance(m, int) or m < 1:
            raise InputError(f"member_count must be a positive integer, got {m!r}")
        lo, hi = self.resolved_dim_range()
        if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 1 or hi < lo or hi > n:
            raise InputError(f"dim_range must satisfy 1 <= lo <= hi <= {n}, got ({lo}, {hi})")
        wlo, whi = self.weight_range
        if not (
            math.isfinite(wlo) and math.isfinite(whi) and 0 < wlo <= whi
        ):
            raise InputError(f"weight_range must satisfy 0 < lo <= hi, got ({wlo}, {whi})")
        if self.flavor in (Flavor.FUSION_FRAME, Flavor.IMAGE_COMPATIBLE) and m * hi < n:
            raise InputError(
                f"flavor {self.flavor.value} needs member_count * max_dim >= "
                f"ambient_dim ({m} * {hi} < {n}): spanning is unreachable"
            )

    def to_json(self) -> dict:
        lo, hi = self.resolved_dim_range()
        return {
            "seed": self.seed,
            "ambient_dim": self.ambient_dim,
            "member_count": self.member_count,
            "dim_range": [lo, hi],
            "weight_range": [self.weight_range[0], self.weight_range[1]],
            "flavor": self.flavor.value,
        }

    @classmethod
    def from_json(cls, obj, name: str = "genspec") -> "GenSpec":
        if not isinstance(obj, dict):
            raise InputError(f"{name}: expected an object")
        if "seed" not in obj:
            raise InputError(f"{name}: missing field 'seed'")
        kwargs = {"seed": obj["seed"]}
        if "ambient_dim" in obj:
            kwargs["ambient_dim"] = obj["ambient_dim"]
        if "member_count" in obj:
            kwargs["member_count"] = obj["member_count"]
        if "dim_range" in obj:
            dr = obj["dim_range"]
            if not isinstance(dr, list) or len(dr) != 2:
                raise InputError(f"{name}.dim_range: expected [lo, hi]")
            kwargs["dim_range"] = (dr[0], dr[1])
        if "weight_range" in obj:
            wr = obj["weight_range"]
            if not isinstance(wr, list) or len(wr) != 2:
                raise InputError(f"{name}.weight_range: expected [lo, hi]")
            kwargs["weight_range"] = (wr[0], wr[1])
        if "flavor" in obj:
            try:
                kwargs["flavor"] = Flavor(obj["flavor"])
            except ValueError:
                choices = ", ".join(f.value for f in Flavor)
                raise InputError(
                    f"{name}.flavor: expected one of {choices}, got {obj['flavor']!r}"
                ) from None
        spec = cls(**kwargs)
        spec.validate()
        return spec


_MAX_REDRAWS = 100


def _draw_basis(rng: Rng, n: int, d: int, carrier: np.ndarray | None = None) -> np.ndarray:
    """Orthonormal n x d basis from normal entries; redraws the (measure
    zero) degenerate cases.  ``carrier`` restricts the span to its columns."""
    for _ in range(_MAX_REDRAWS):
        g = rng.normals(carrier.shape[1], d) if carrier is not None else rng.normals(n, d)
        raw = carrier @ g if carrier is not None else g
        q, rank = linalg.qr_orthonormalize(raw)
        if rank == d:
            return q
    raise InputError("could not draw a full-rank basis; dim_range too tight?")


def _spanning_dims(rng: Rng, spec: GenSpec) -> list:
    lo, hi = spec.resolved_dim_range()
    dims = [rng.randint(lo, hi) for _ in range(spec.member_count)]
    if spec.flavor in (Flavor.FUSION_FRAME, Flavor.IMAGE_COMPATIBLE):
        i = 0
        while sum(dims) < spec.ambient_dim:
            if dims[i % len(dims)] < hi:
                dims[i % len(dims)] += 1
            i += 1
    return dims


def generate(spec: GenSpec):
    """Build the instance described by ``spec``.

    Returns (system, K) with K = None for the operator-free flavors.
    Deterministic per seed; the draw order is dims, weights, then the
    flavor-specific matrices, exactly as coded here.
    """
    spec.validate()
    rng = Rng(spec.seed)
    n = spec.ambient_dim

    if spec.flavor is Flavor.IMAGE_COMPATIBLE:
        for _ in range(_MAX_REDRAWS):
            k = rng.normals(n, n)
            sv = linalg.singular_values(k)
            if sv[-1] > 1e-4 * sv[0]:
                break
        else:
            raise InputError("could not draw a well-conditioned operator")
        row_space, _ = linalg.qr_orthonormalize(k.T)
    else:
        k = None
        row_space = None

    for _ in range(_MAX_REDRAWS):
        dims = _spanning_dims(rng, spec)
        weights = [rng.uniform(*spec.weight_range) for _ in range(spec.member_count)]
        subs = [
            Subspace(n, _draw_basis(rng, n, d, carrier=row_space), _trusted=True)
            for d in dims
        ]
        if spec.flavor in (Flavor.FUSION_FRAME, Flavor.IMAGE_COMPATIBLE):
            stacked = np.hstack([s.basis for s in subs])
            if linalg.matrix_rank(stacked) < n:
                continue  # spanning failed; redraw everything
        system = WeightedSubspaceSystem(
            [Member(s, w) for s, w in zip(subs, weights)]
        )
        break
    else:
        raise InputError("could not draw a spanning family; dim_range too tight?")

    if spec.flavor is Flavor.K_FUSION_FRAME:
        x = rng.normals(n, n)
        k = linalg.sqrt_psd(system.frame_operator()) @ x
    return system, k
