import pytest

from dyboson.rootdata import Parity, Sector, build_root_data, node_sector


def test_sl2_2_entries():
    d = build_root_data(1, 1)
    assert d.a(2, 2) == 0
    assert d.a(1, 2) == -1
    assert d.a(2, 3) == 1
    assert d.a(1, 1) == 2 and d.a(3, 3) == -2


def test_sl3_1_entries():
    d = build_root_data(2, 0)
    assert d.a(1, 1) == d.a(2, 2) == 2
    assert d.a(3, 3) == 0
    assert d.a(1, 2) == -1


def test_single_odd_node():
    d = build_root_data(0, 0)
    assert d.cartan == ((0,),)
    assert d.parity(1) is Parity.ODD


def test_symmetric_and_tridiagonal(data):
    for i in data.nodes:
        for j in data.nodes:
            assert data.a(i, j) == data.a(j, i)
            if abs(i - j) > 1:
                assert data.a(i, j) == 0
            if abs(i - j) == 1:
                assert abs(data.a(i, j)) == 1


def test_parity_only_at_fermionic_node(data):
    odd = [i for i in data.nodes if data.parity(i) is Parity.ODD]
    assert odd == [data.M + 1]


def test_sectors():
    d = build_root_data(1, 1)
    assert node_sector(d, 1) is Sector.BOSONIC_LEFT
    assert node_sector(d, 2) is Sector.FERMIONIC
    assert node_sector(d, 3) is Sector.BOSONIC_RIGHT


def test_invalid_inputs():
    with pytest.raises(ValueError):
        build_root_data(-1, 0)
    with pytest.raises(IndexError):
        build_root_data(1, 1).a(0, 1)
    with pytest.raises(IndexError):
        node_sector(build_root_data(1, 1), 4)
