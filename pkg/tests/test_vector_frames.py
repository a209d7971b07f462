import numpy as np
import pytest

from fusionframes.errors import InputError
from fusionframes.fusion_systems import Member, Verdict, WeightedSubspaceSystem, coordinate_lines
from fusionframes.generator import Rng
from fusionframes.kfusion import kfusion_verify
from fusionframes.subspaces import Subspace
from fusionframes.suite import attach_local_frames, fusion_instance, verified_instance
from fusionframes.vector_frames import (
    VectorFrame,
    kframe_verify,
    local_to_global_check,
    vector_frame_bounds,
)

from oracles import null_space


def test_bounds_orthonormal_basis():
    rep = vector_frame_bounds(VectorFrame(3, list(np.eye(3))))
    assert rep.verdict is Verdict.PARSEVAL
    np.testing.assert_allclose([rep.lower, rep.upper], [1.0, 1.0])


def test_bounds_redundant_family():
    frame = VectorFrame(2, [np.array([1.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    rep = vector_frame_bounds(frame)
    assert rep.verdict is Verdict.FRAME
    np.testing.assert_allclose([rep.lower, rep.upper], [1.0, 2.0])


def test_bounds_deficient_family():
    rep = vector_frame_bounds(VectorFrame(2, [np.array([1.0, 0.0])]))
    assert rep.verdict is Verdict.BESSEL_ONLY
    assert rep.lower == 0.0


def test_kframe_matched_operator():
    frame = VectorFrame(2, [np.array([1.0, 0.0])])
    rep = kframe_verify(frame, np.diag([1.0, 0.0]))
    assert rep.is_kff
    assert rep.optimal_lower == pytest.approx(1.0, abs=1e-10)
    assert rep.optimal_upper == pytest.approx(1.0, abs=1e-10)


def test_kframe_refuted_identity():
    frame = VectorFrame(2, [np.array([1.0, 0.0])])
    rep = kframe_verify(frame, np.eye(2))
    assert not rep.is_kff and rep.optimal_lower == 0.0


def test_kframe_identity_matches_plain_bounds():
    rng = Rng(61)
    for _ in range(15):
        n = rng.randint(2, 6)
        count = rng.randint(1, 8)
        frame = VectorFrame(n, [rng.normals(n) for _ in range(count)])
        plain = vector_frame_bounds(frame)
        rep = kframe_verify(frame, np.eye(n))
        assert rep.optimal_upper == plain.upper
        assert rep.is_kff == plain.verdict.is_frame()
        if rep.is_kff:
            assert rep.optimal_lower == pytest.approx(plain.lower, rel=1e-10)


def test_kframe_gamma_reconstructs():
    rng = Rng(62)
    np_rng = np.random.default_rng(620)
    for _ in range(10):
        n = rng.randint(2, 6)
        count = n + rng.randint(0, 4)
        vectors = [rng.normals(n) for _ in range(count)]
        frame = VectorFrame(n, vectors)
        k = rng.normals(n, n)
        rep = kframe_verify(frame, k)
        if not rep.is_kff:
            continue
        t = frame.synthesis_matrix()
        gamma_norm = np.linalg.svd(rep.gamma, compute_uv=False)[0]
        for _ in range(100):
            f = np_rng.standard_normal(n)
            coeffs = rep.gamma @ f
            assert np.linalg.norm(t @ coeffs - k @ f) <= 1e-9 * max(np.linalg.norm(k @ f), 1e-9)
            assert np.linalg.norm(coeffs) <= gamma_norm * np.linalg.norm(f) + 1e-9


def test_kframe_refuted_has_violating_direction():
    # refuted: every candidate constant is beaten along the null direction
    frame = VectorFrame(3, [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])])
    k = np.eye(3)
    rep = kframe_verify(frame, k)
    assert not rep.is_kff
    nulls = null_space(frame.frame_operator())
    assert nulls.shape[1] == 1
    f = nulls[:, 0]
    assert np.linalg.norm(k.T @ f) > 0.9
    assert f @ (frame.frame_operator() @ f) < 1e-12


def test_local_to_global_worked_example():
    system = WeightedSubspaceSystem(
        [
            Member(
                Subspace.from_spanning(np.eye(3)[:, :2]),
                1.0,
                (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])),
            ),
            Member(Subspace.span([0.0, 0.0, 1.0]), 1.0, (np.array([0.0, 0.0, 1.0]),)),
        ]
    )
    rep = local_to_global_check(system)
    assert rep.c == pytest.approx(1.0) and rep.d == pytest.approx(1.0)
    assert rep.global_bounds.lower == pytest.approx(1.0)
    assert rep.global_bounds.upper == pytest.approx(1.0)
    assert rep.equivalent and rep.interval_ok


def test_local_to_global_duplicated_vector():
    system = WeightedSubspaceSystem(
        [
            Member(
                Subspace.span([1.0, 0.0]),
                1.0,
                (np.array([1.0, 0.0]), np.array([1.0, 0.0])),
            ),
            Member(Subspace.span([0.0, 1.0]), 1.0, (np.array([0.0, 1.0]),)),
        ]
    )
    rep = local_to_global_check(system)
    assert rep.local_lower[0] == pytest.approx(2.0)
    assert rep.local_upper[0] == pytest.approx(2.0)
    assert rep.c == pytest.approx(1.0) and rep.d == pytest.approx(2.0)
    assert rep.global_bounds.lower == pytest.approx(1.0)
    assert rep.global_bounds.upper == pytest.approx(2.0)
    assert rep.equivalent and rep.interval_ok


def test_local_to_global_random_systems():
    rng = Rng(63)
    for _ in range(25):
        system = attach_local_frames(fusion_instance(rng), rng)
        rep = local_to_global_check(system)
        assert not rep.local_failure
        assert rep.equivalent and rep.interval_ok


def test_local_vector_outside_subspace_rejected():
    system = WeightedSubspaceSystem(
        [Member(Subspace.span([1.0, 0.0]), 1.0, (np.array([1.0, 0.5]),))]
    )
    with pytest.raises(InputError):
        local_to_global_check(system)


def test_missing_local_frame_rejected():
    system = coordinate_lines(2)
    with pytest.raises(InputError):
        local_to_global_check(system)


def test_non_spanning_local_frame_reports_failure():
    system = WeightedSubspaceSystem(
        [
            Member(
                Subspace.from_spanning(np.eye(3)[:, :2]),
                1.0,
                (np.array([1.0, 0.0, 0.0]),),  # only one vector for a plane
            ),
            Member(Subspace.span([0.0, 0.0, 1.0]), 1.0, (np.array([0.0, 0.0, 1.0]),)),
        ]
    )
    rep = local_to_global_check(system)
    assert rep.local_failure
    assert rep.c <= 1e-12
    assert rep.equivalent is None and rep.interval_ok is None


def test_flattened_system_inherits_operator_verification():
    # a verified pair with orthonormal local frames: the flattened weighted
    # family verifies for the same operator with the same bounds
    rng = Rng(64)
    for _ in range(10):
        system, k = verified_instance(rng)
        with_frames = WeightedSubspaceSystem(
            [
                Member(m.subspace, m.weight, tuple(m.subspace.basis.T))
                for m in system.members
                if m.subspace.dim > 0
            ]
        )
        flattened = [
            m.weight * v for m in with_frames.members for v in m.local_frame
        ]
        frame = VectorFrame(system.ambient_dim, flattened)
        rep_system = kfusion_verify(with_frames, k)
        rep_frame = kframe_verify(frame, k)
        assert rep_frame.is_kff == rep_system.is_kff
        if rep_frame.is_kff:
            assert rep_frame.optimal_lower == pytest.approx(
                rep_system.optimal_lower, rel=1e-8
            )
            assert rep_frame.optimal_upper == pytest.approx(
                rep_system.optimal_upper, rel=1e-8
            )


def test_vector_frame_validation():
    with pytest.raises(InputError):
        VectorFrame(2, [])
    with pytest.raises(InputError):
        VectorFrame(2, [np.array([1.0, 0.0, 0.0])])
    with pytest.raises(InputError):
        kframe_verify(VectorFrame(2, [np.array([1.0, 0.0])]), np.eye(3))
