import logging
import math

import numpy as np
import pytest

from conftest import N_RANDOM
from entanglement import (
    ckw_check,
    ckw_from_reduced,
    concurrence,
    pure_bipartite_concurrence,
    reduced_single,
    spin_flip,
    tangle,
)
from errors import ArgumentError
from hilbert import DensityMatrix, basis_ket, partial_trace, space_of, superpose

BELLS = {
    "phi+": [1, 0, 0, 1],
    "phi-": [1, 0, 0, -1],
    "psi+": [0, 1, 1, 0],
    "psi-": [0, 1, -1, 0],
}


def _pure(vec):
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@pytest.mark.parametrize("name", sorted(BELLS))
def test_bell_states_maximally_entangled(name):
    result = concurrence(_pure(BELLS[name]))
    assert result.value == pytest.approx(1.0, abs=1e-12)
    assert result.route == "hermitian"


def test_product_state_not_entangled():
    assert concurrence(_pure([1, 0, 0, 0])).value == pytest.approx(0.0, abs=1e-12)
    assert concurrence(np.eye(4) / 4).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_werner_state(p):
    rho = p * _pure(BELLS["psi-"]) + (1 - p) * np.eye(4) / 4
    assert concurrence(rho).value == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-9)


def test_cavity_pair_reduced_state_value():
    space = space_of("C1", "C2", "A1")
    gt = math.pi / 3
    psi = superpose(space, [(1, (0, 1, "g")), (math.cos(gt), (1, 0, "g")), (-math.sin(gt), (0, 0, "e"))])
    rho = partial_trace(psi.to_density(), {"C1", "C2"})
    c = concurrence(rho)
    assert c.value == pytest.approx(0.5, abs=1e-10)
    assert tangle(c) == pytest.approx(0.25, abs=1e-10)
    assert float(c) == c.value


def test_atom_cavity_reduced_state_value():
    space = space_of("C1", "C2", "A1")
    gt = math.pi / 4
    psi = superpose(space, [(1, (0, 1, "g")), (math.cos(gt), (1, 0, "g")), (-math.sin(gt), (0, 0, "e"))])
    rho = partial_trace(psi.to_density(), {"C1", "A1"})
    assert concurrence(rho).value == pytest.approx(0.5, abs=1e-10)


def test_concurrence_rejects_wrong_shapes():
    with pytest.raises(ArgumentError):
        concurrence(np.eye(8) / 8)
    rho = DensityMatrix(space_of("C1", "C2", cavity_dim=3), np.eye(9) / 9)
    with pytest.raises(ArgumentError):
        concurrence(rho)


def test_concurrence_renormalize():
    rho = 0.5 * _pure(BELLS["phi+"])
    assert concurrence(rho).value == pytest.approx(0.5, abs=1e-12)
    assert concurrence(rho, renormalize=True).value == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ArgumentError):
        concurrence(np.zeros((4, 4)), renormalize=True)


def test_unphysical_x_matrix_takes_product_route(caplog):
    # |01⟩,|10⟩ 块 [[0.25, 0.5i], [−0.5i, 0.25]] 有负本征值
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 0.5
    rho[1, 1] = rho[2, 2] = 0.25
    rho[2, 1] = 0.5j
    rho[1, 2] = -0.5j
    with caplog.at_level(logging.WARNING, logger="cavity_qed"):
        result = concurrence(rho)
    assert result.route == "product"
    assert result.value == pytest.approx(0.5, abs=1e-9)
    assert any("非正定" in r.message for r in caplog.records)


def test_concurrence_range_and_pure_formula(rng, random_ket, random_density):
    space = space_of("C1", "A1")
    for _ in range(N_RANDOM):
        v = random_ket(rng, 4)
        expected = 2 * abs(v[0] * v[3] - v[1] * v[2])
        rho = DensityMatrix(space, np.outer(v, v.conj()))
        c = concurrence(rho).value
        assert c == pytest.approx(expected, abs=1e-9)
        # 纯态：与任一单体约化态的 2√det 一致
        assert pure_bipartite_concurrence(partial_trace(rho, {"C1"})) == pytest.approx(c, abs=1e-10)
        assert pure_bipartite_concurrence(partial_trace(rho, {"A1"})) == pytest.approx(c, abs=1e-10)
        c = concurrence(random_density(rng, 4, rank=int(rng.integers(1, 5)))).value
        assert 0.0 <= c <= 1.0 + 1e-12


def test_concurrence_local_unitary_invariance(rng, random_density, random_unitary):
    for _ in range(N_RANDOM):
        rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
        u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
        rotated = u @ rho @ u.conj().T
        assert concurrence(rotated).value == pytest.approx(concurrence(rho).value, abs=1e-8)


def test_spin_flip_involution(rng, random_density):
    for _ in range(N_RANDOM):
        rho = random_density(rng, 4)
        assert np.max(np.abs(spin_flip(spin_flip(rho)) - rho)) < 1e-14


def test_pure_bipartite_concurrence():
    assert pure_bipartite_concurrence(np.eye(2) / 2) == pytest.approx(1.0)
    assert pure_bipartite_concurrence(np.diag([1.0, 0.0])) == 0.0
    with pytest.raises(ArgumentError):
        pure_bipartite_concurrence(np.eye(4) / 4)


def test_pure_bipartite_concurrence_warns_on_trace(caplog):
    with caplog.at_level(logging.WARNING, logger="cavity_qed"):
        value = pure_bipartite_concurrence(np.diag([0.3, 0.3]))
    assert value == pytest.approx(0.6)
    assert any("迹" in r.message for r in caplog.records)


def test_ckw_ideal_identity():
    space = space_of("C1", "C2", "A1")
    for gt in np.linspace(0, 2 * math.pi, 50):
        psi = superpose(space, [(1, (0, 1, "g")), (math.cos(gt), (1, 0, "g")), (-math.sin(gt), (0, 0, "e"))])
        report = ckw_check(psi.to_density())
        assert report.lhs == pytest.approx(1.0, abs=1e-10)
        assert report.rhs == pytest.approx(1.0, abs=1e-10)
        assert report.satisfied
        assert report.trace == pytest.approx(1.0)


def test_ckw_random_pure_states(rng, random_ket):
    space = space_of("C1", "C2", "A1")
    for _ in range(N_RANDOM):
        v = random_ket(rng, 8)
        report = ckw_check(DensityMatrix(space, np.outer(v, v.conj())))
        assert report.satisfied
        assert 0.0 <= report.lhs <= 2.0 + 1e-12
        assert 0.0 <= report.rhs <= 2.0 + 1e-12


def test_ckw_from_reduced_matches_full_check():
    space = space_of("C1", "C2", "A1")
    psi = superpose(space, [(1, (0, 1, "g")), (0.3, (1, 0, "g")), (-0.8, (0, 0, "e"))])
    rho = psi.to_density()
    direct = ckw_check(rho)
    assembled = ckw_from_reduced(
        partial_trace(rho, {"C1", "C2"}), partial_trace(rho, {"C2", "A1"}), reduced_single(rho, "C2")
    )
    assert assembled.lhs == pytest.approx(direct.lhs, abs=1e-12)
    assert assembled.rhs == pytest.approx(direct.rhs, abs=1e-12)


def test_ckw_check_requires_tripartite_qubits():
    rho = basis_ket(space_of("C1", "C2", "A2"), (0, 1, "g")).to_density()
    with pytest.raises(ArgumentError):
        ckw_check(rho)
    rho3 = basis_ket(space_of("C1", "C2", "A1", cavity_dim=3), (0, 1, "g")).to_density()
    with pytest.raises(ArgumentError):
        ckw_check(rho3)
