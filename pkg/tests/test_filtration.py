import numpy as np
import pytest

from sopieces.census import census, piece_representative, unipotent_nilpotents
from sopieces.filtration import (FiltrationCatalog, PieceLabel, QFiltration, adaptedness,
                                 admissible_labels, degree_bound, canonical_filtration, class_label, is_adapted,
                                 lift_to_filtration, model_filtration, piece_label, split_filtration,
                                 verify_uniqueness)
from sopieces.groups import dickson, enumerate_unipotents
from sopieces.linalg import Subspace
from sopieces.oracles import iter_E_ge2
from sopieces.nilpotent import witness

from conftest import beta_example, space


def test_trivial_filtration():
    s = space("D2+", 2)
    filt = canonical_filtration(s, np.zeros((2, 2), dtype=np.int64))
    assert filt.f(0) == 2 and filt.X(0).dim == 2 and filt.X(1).dim == 0
    assert piece_label(canonical_filtration(space("D4+", 2), np.zeros((4, 4), dtype=np.int64))) \
        == PieceLabel((4,))


def test_beta_example_filtration(gf2):
    s, N = beta_example()
    filt = canonical_filtration(witness(s, N))
    assert [filt.f(a) for a in range(-2, 3)] == [1, 0, 1, 0, 1]
    e = Subspace(gf2, 3, [[1, 0, 0]])
    er = Subspace(gf2, 3, [[1, 0, 0], [0, 0, 1]])
    assert filt.X(1) == filt.X(2) == e
    assert filt.X(0) == filt.X(-1) == er
    assert piece_label(filt) == PieceLabel((1, 0, 1, 0, 1))
    assert is_adapted(filt, N)


def test_regular_D3_odd_p():
    s = space("D3", 3)
    for N in unipotent_nilpotents(s, enumerate_unipotents(s)):
        w = witness(s, N)
        if w.e == 3:
            assert piece_label(canonical_filtration(w)) == PieceLabel((1, 0, 1, 0, 1))


def test_adaptedness_failures():
    s, N = beta_example()
    filt = canonical_filtration(s, N)
    assert not is_adapted(filt.shifted(1), N)
    trivial = QFiltration(s, 0, [Subspace.full(s.ctx, 3)])
    assert trivial.f(0) == 3 and trivial.is_q_filtration()
    rep = adaptedness(trivial, N)
    assert rep["q_filtration"] and not all(rep.values())
    with pytest.raises(ValueError):
        is_adapted(filt.shifted(1), N, strict=True)


def test_dropping_shift_breaks_adaptedness():
    s, N = beta_example()
    filt = canonical_filtration(s, N, keep_shift=False, check=False)
    assert not is_adapted(filt, N)


@pytest.mark.parametrize("desc", ["D3", "D4+", "D4-"])
def test_uniqueness_small(desc):
    s = space(desc, 2)
    cat = FiltrationCatalog(s, degree_bound(s.D))
    for N in unipotent_nilpotents(s, enumerate_unipotents(s)):
        w = witness(s, N)
        assert verify_uniqueness(w, cat)
        assert verify_uniqueness(w)


def test_admissible_labels_counts():
    assert len(admissible_labels(2, 1)) == 1
    assert len(admissible_labels(2, -1)) == 1
    assert [lab.f for lab in admissible_labels(3, None)] == [(3,), (1, 0, 1, 0, 1)]
    # D=4 by hand: f0=4; f0=2 with f2=1; f0=2 with f1=... odd degrees need even dims;
    # f0=0 with f1=2 (two components); f0=0 with f2=... needs f0 >= f2, so none
    labs = admissible_labels(4, 1)
    assert sorted(str(x) for x in labs) == sorted(
        ["(4)", "(1,0,2,0,1)", "j=0:(2,0,2)", "j=1:(2,0,2)"])
    assert sorted(str(x) for x in admissible_labels(4, -1)) == ["(1,0,2,0,1)", "(4)"]


def test_components_both_realised():
    cen = census(space("D4+", 2))
    comps = {lab.component for lab in cen.piece_counts if lab.at(0) == 0}
    assert comps == {0, 1}


def test_class_labels(gf2):
    s, N = beta_example()
    cl = class_label(canonical_filtration(s, N), N)
    assert cl.S == ((1,),)
    with pytest.raises(ValueError):
        class_label(canonical_filtration(space("D3", 3), np.zeros((3, 3), dtype=np.int64)),
                    np.zeros((3, 3), dtype=np.int64))


def test_D5_has_two_class_partitions():
    cen = census(space("D5", 2))
    parts = {cl.S for cl in cen.class_labels if cl.piece == PieceLabel((1, 0, 3, 0, 1))}
    assert parts == {((1, 3),), ((1,), (3,))}


def test_split_filtration_beta(gf2):
    s, N = beta_example()
    pieces = split_filtration(canonical_filtration(s, N))
    assert Subspace(gf2, 3, pieces[2]) == Subspace(gf2, 3, [[1, 0, 0]])
    assert Subspace(gf2, 3, pieces[0]) == Subspace(gf2, 3, [[0, 0, 1]])
    assert pieces[-2].shape[0] == 1
    trivial = split_filtration(canonical_filtration(s, np.zeros((3, 3), dtype=np.int64)))
    assert list(trivial) == [0] and trivial[0].shape[0] == 3


def test_split_f0_zero_planes():
    s = space("D4+", 2)
    for lab in admissible_labels(4, 1):
        if lab.at(0) == 0:
            pieces = split_filtration(model_filtration(s, lab))
            assert sorted(pieces) == [-1, 1]
            assert pieces[1].shape[0] == 2 and pieces[-1].shape[0] == 2


def test_lift_roundtrip():
    s, N = beta_example()
    filt = canonical_filtration(s, N)
    pieces = split_filtration(filt)
    degs = sorted(pieces)
    basis = np.vstack([pieces[a] for a in degs])
    F = s.ctx
    from sopieces.linalg import inverse
    T = F.matmul(inverse(F, basis.T), F.matmul(N, basis.T))
    mask = np.zeros_like(T)
    pos = {}
    i = 0
    for a in degs:
        pos[a] = slice(i, i + pieces[a].shape[0])
        i += pieces[a].shape[0]
    for a in degs:
        if a + 2 in pos:
            mask[pos[a + 2], pos[a]] = 1
    Nl = lift_to_filtration(T * mask, pieces, s)
    assert piece_label(canonical_filtration(s, Nl)) == piece_label(filt)


@pytest.mark.parametrize("desc,q", [("D4+", 2), ("D4-", 2), ("D4+", 3), ("D5", 2)])
def test_representatives(desc, q):
    s = space(desc, q)
    for lab in admissible_labels(s.D, s.eta):
        N = piece_representative(s, lab)
        u = s.ctx.add(N, np.eye(s.D, dtype=np.int64))
        assert s.is_isometry(u) and dickson(s, u) == 0
        assert piece_label(canonical_filtration(s, N)) == lab


@pytest.mark.parametrize("desc,q", [("D3", 2), ("D4+", 2), ("D4-", 2), ("D5", 2), ("D3", 3),
                                    ("D4+", 3), ("D4-", 3), ("D3", 4)])
def test_maps_raising_by_two_give_SO(desc, q):
    s = space(desc, q)
    I = np.eye(s.D, dtype=np.int64)
    for lab in admissible_labels(s.D, s.eta):
        n = 0
        for N in iter_E_ge2(model_filtration(s, lab), star=False):
            u = s.ctx.add(I, N)
            assert s.is_isometry(u) and dickson(s, u) == 0, (lab, N)
            n += 1
        assert n >= 1
