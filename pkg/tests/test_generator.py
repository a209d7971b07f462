import math

import numpy as np
import pytest

from fusionframes import linalg
from fusionframes.errors import InputError
from fusionframes.generator import Flavor, GenSpec, Rng, generate
from fusionframes.kfusion import kfusion_verify


# --- reference reimplementation of the documented update equations, in
# --- plain Python integers, independent of the packaged kernels

MASK = (1 << 64) - 1


def ref_splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & MASK
    x = z
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31), z


def ref_seed_state(seed):
    z = seed
    while True:
        out, z = ref_splitmix64(z)
        if out != 0:
            return out


def ref_next(s):
    s ^= s >> 12
    s &= MASK
    s ^= (s << 25) & MASK
    s ^= s >> 27
    return (s * 2685821657736338717) & MASK, s


class RefStream:
    def __init__(self, seed):
        self.s = ref_seed_state(seed)
        self.spare = None

    def u64(self):
        out, self.s = ref_next(self.s)
        return out

    def uniform(self):
        return (self.u64() >> 11) * 2.0 ** -53

    def normal(self):
        if self.spare is not None:
            out, self.spare = self.spare, None
            return out
        while True:
            x = 2.0 * self.uniform() - 1.0
            y = 2.0 * self.uniform() - 1.0
            r2 = x * x + y * y
            if 0.0 < r2 < 1.0:
                m = math.sqrt(-2.0 * math.log(r2) / r2)
                self.spare = y * m
                return x * m


@pytest.mark.parametrize("seed", [0, 1, 42, 2 ** 64 - 1, 123456789])
def test_u64_stream_matches_documented_equations(seed):
    rng = Rng(seed)
    ref = RefStream(seed)
    for _ in range(200):
        assert rng.u64() == ref.u64()


@pytest.mark.parametrize("seed", [1, 7, 99])
def test_normal_stream_matches_documented_equations(seed):
    rng = Rng(seed)
    ref = RefStream(seed)
    ours = rng.normals(257)
    theirs = np.array([ref.normal() for _ in range(257)])
    np.testing.assert_array_equal(ours, theirs)


def test_uniform_range_and_determinism():
    rng = Rng(5)
    values = [rng.uniform(2.0, 3.0) for _ in range(500)]
    assert all(2.0 <= v < 3.0 for v in values)
    rng2 = Rng(5)
    assert values[0] == rng2.uniform(2.0, 3.0)


def test_randint_inclusive_hits_endpoints():
    rng = Rng(6)
    draws = {rng.randint(1, 3) for _ in range(300)}
    assert draws == {1, 2, 3}


def test_normals_reasonable_moments():
    x = Rng(7).normals(20_000)
    assert abs(float(x.mean())) < 0.05
    assert abs(float(x.std()) - 1.0) < 0.05


def test_spawn_streams_are_independent_and_stable():
    rng = Rng(9)
    a = rng.spawn(0)
    b = rng.spawn(1)
    assert a.u64() != b.u64()
    # spawning again gives the same substream
    assert Rng(9).spawn(0).u64() == Rng(9).spawn(0).u64()


@pytest.mark.parametrize("seed,index", [(9, 0), (9, 3), (12345, 7)])
def test_spawn_matches_documented_recipe(seed, index):
    z = (seed + index * 0x9E3779B97F4A7C15) & MASK
    child_seed, _ = ref_splitmix64(z)
    assert Rng(seed).spawn(index).u64() == RefStream(child_seed).u64()


def test_generate_same_seed_bit_identical():
    spec = GenSpec(seed=1234, ambient_dim=7, member_count=4, flavor=Flavor.K_FUSION_FRAME)
    s1, k1 = generate(spec)
    s2, k2 = generate(spec)
    assert np.array_equal(k1, k2)
    for m1, m2 in zip(s1.members, s2.members):
        assert m1.weight == m2.weight
        assert np.array_equal(m1.subspace.basis, m2.subspace.basis)


def test_generated_artifacts_satisfy_invariants():
    for seed in range(30):
        spec = GenSpec(
            seed=seed,
            ambient_dim=6,
            member_count=4,
            dim_range=(1, 3),
            weight_range=(0.25, 4.0),
        )
        system, k = generate(spec)
        assert k is None
        assert len(system) == 4
        for m in system.members:
            assert 1 <= m.subspace.dim <= 3
            assert 0.25 <= m.weight <= 4.0
            gram = m.subspace.basis.T @ m.subspace.basis
            assert np.abs(gram - np.eye(m.subspace.dim)).max() < 1e-10


def test_fusion_frame_flavor_guarantee():
    for seed in range(500):
        system, _ = generate(
            GenSpec(seed=seed, ambient_dim=6, member_count=4, flavor=Flavor.FUSION_FRAME)
        )
        assert system.fusion_bounds().verdict.is_frame()


def test_k_fusion_frame_flavor_guarantee():
    for seed in range(500):
        system, k = generate(
            GenSpec(seed=seed, ambient_dim=6, member_count=3, flavor=Flavor.K_FUSION_FRAME)
        )
        assert kfusion_verify(system, k).is_kff


def test_image_compatible_flavor_guarantee():
    for seed in range(100):
        system, k = generate(
            GenSpec(seed=seed, ambient_dim=6, member_count=4, flavor=Flavor.IMAGE_COMPATIBLE)
        )
        # members invariant under the row-space projection of k
        proj = linalg.pseudo_inverse(k) @ k
        for m in system.members:
            image = m.subspace.image_under(proj)
            assert m.subspace.contains(image, tol=1e-8)
        assert system.fusion_bounds().verdict.is_frame()


def test_genspec_validation_errors():
    with pytest.raises(InputError):
        GenSpec(seed=-1).validate()
    with pytest.raises(InputError):
        GenSpec(seed=0, ambient_dim=1).validate()
    with pytest.raises(InputError):
        GenSpec(seed=0, member_count=0).validate()
    with pytest.raises(InputError):
        GenSpec(seed=0, ambient_dim=4, dim_range=(0, 2)).validate()
    with pytest.raises(InputError):
        GenSpec(seed=0, ambient_dim=4, dim_range=(3, 2)).validate()
    with pytest.raises(InputError):
        GenSpec(seed=0, weight_range=(0.0, 1.0)).validate()
    with pytest.raises(InputError):
        GenSpec(
            seed=0, ambient_dim=8, member_count=2, dim_range=(1, 2), flavor=Flavor.FUSION_FRAME
        ).validate()


def test_genspec_json_roundtrip():
    spec = GenSpec(
        seed=99,
        ambient_dim=5,
        member_count=3,
        dim_range=(1, 2),
        weight_range=(0.5, 1.5),
        flavor=Flavor.FUSION_FRAME,
    )
    back = GenSpec.from_json(spec.to_json())
    assert back == spec
    with pytest.raises(InputError):
        GenSpec.from_json({"seed": 0, "flavor": "nope"})
    with pytest.raises(InputError):
        GenSpec.from_json({"ambient_dim": 4})
