import pytest

from anneal_forge.chimera import (
    HardwareGraph,
    apply_defects,
    build_chimera,
    bundled_defect_topology,
    topology_from_json,
    topology_to_json,
)


class TestBuild:
    def test_single_cell(self):
        hw = build_chimera(1, 1, 4)
        assert hw.num_qubits == 8
        assert hw.num_couplers == 16

    def test_two_cells_vertical(self):
        hw = build_chimera(2, 1, 4)
        assert hw.num_qubits == 16
        assert hw.num_couplers == 36
        intra = [e for e in hw.all_edges
                 if hw.qubit_coords(e[0])[:2] == hw.qubit_coords(e[1])[:2]]
        inter = [e for e in hw.all_edges if e not in intra]
        assert len(intra) == 32 and len(inter) == 4
        for u, v in inter:
            assert hw.qubit_coords(u)[2] == hw.qubit_coords(v)[2] == 0

    def test_full_chip(self):
        hw = build_chimera(12, 12, 4)
        assert hw.num_qubits == 1152
        assert hw.num_couplers == 12 * 12 * 16 + 4 * (12 * 11 + 12 * 11)

    @pytest.mark.parametrize("m,n,l", [(1, 1, 1), (2, 3, 2), (3, 2, 4)])
    def test_coupler_formula(self, m, n, l):
        hw = build_chimera(m, n, l)
        assert hw.num_couplers == m * n * l * l + l * (n * (m - 1) + m * (n - 1))

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            build_chimera(0, 1, 4)


class TestCoordinates:
    def test_roundtrip(self):
        hw = build_chimera(3, 4, 4)
        for qid in range(hw.num_qubits):
            assert hw.qubit_id(*hw.qubit_coords(qid)) == qid

    def test_known_id(self):
        hw = build_chimera(12, 12, 4)
        assert hw.qubit_id(0, 0, 0, 0) == 0
        assert hw.qubit_id(0, 0, 1, 0) == 4
        assert hw.qubit_id(0, 1, 0, 0) == 8
        assert hw.qubit_id(1, 0, 0, 0) == 96

    def test_illegal(self):
        hw = build_chimera(2, 2, 4)
        with pytest.raises(ValueError):
            hw.qubit_coords(32)
        with pytest.raises(ValueError):
            hw.qubit_id(2, 0, 0, 0)


class TestEdgeLegality:
    def test_roundtrip_exactness(self):
        # The legality checker must accept exactly the constructed edge set.
        hw = build_chimera(2, 3, 2)
        built = set(hw.all_edges)
        checked = {(u, v) for u in range(hw.num_qubits) for v in range(u + 1, hw.num_qubits)
                   if hw.is_chimera_edge(u, v)}
        assert checked == built

    def test_symmetry(self):
        hw = build_chimera(2, 2, 4)
        for u, v in hw.all_edges:
            assert hw.is_chimera_edge(v, u)

    def test_interior_degree_bound(self):
        hw = build_chimera(3, 3, 4)
        assert all(hw.degree(q) <= 6 for q in hw.usable_qubits)
        center_vertical = hw.qubit_id(1, 1, 0, 0)
        assert hw.degree(center_vertical) == 6


class TestDefects:
    def test_noop(self):
        hw = build_chimera(1, 1, 4)
        assert apply_defects(hw) == hw

    def test_single_qubit(self):
        hw = apply_defects(build_chimera(1, 1, 4), disabled_qubits=[0])
        assert len(hw.usable_qubits) == 7
        assert len(hw.usable_edges) == 12
        assert 0 not in hw.adjacency

    def test_chip_scale_mask(self):
        hw = apply_defects(build_chimera(12, 12, 4),
                           disabled_qubits=range(55))
        assert len(hw.usable_qubits) == 1097

    def test_disabled_coupler(self):
        hw = apply_defects(build_chimera(1, 1, 4), disabled_couplers=[(4, 0)])
        assert len(hw.usable_edges) == 15
        assert not hw.is_usable_edge(0, 4)
        assert hw.is_usable_qubit(0)

    def test_illegal_qubit(self):
        with pytest.raises(ValueError, match="illegal qubit"):
            apply_defects(build_chimera(1, 1, 4), disabled_qubits=[99])

    def test_illegal_coupler(self):
        with pytest.raises(ValueError, match="illegal coupler"):
            apply_defects(build_chimera(1, 1, 4), disabled_couplers=[(0, 1)])


class TestSerialization:
    def test_roundtrip(self):
        hw = apply_defects(build_chimera(2, 2, 4),
                           disabled_qubits=[3], disabled_couplers=[(0, 4)])
        back = topology_from_json(topology_to_json(hw))
        assert back == hw

    def test_bundled_mask(self):
        hw = bundled_defect_topology()
        assert (hw.m, hw.n, hw.l) == (12, 12, 4)
        assert len(hw.usable_qubits) == 1097
