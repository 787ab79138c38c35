"""Explicit top layers of the canonical filtration, checked on every unipotent."""
import numpy as np
import pytest

from sopieces.census import census, piece_representative, unipotent_nilpotents
from sopieces.filtration import admissible_labels, canonical_filtration
from sopieces.linalg import Subspace, mat_pow, nullspace
from sopieces.nilpotent import compute_line, nilpotency_index, reduce_once

from conftest import space


def _elements(desc, q, step):
    s = space(desc, q)
    return s, unipotent_nilpotents(s, census(s).unipotents)[::step]


@pytest.mark.parametrize("desc,q,step", [("D3", 2, 1), ("D4+", 2, 1), ("D4-", 2, 1), ("D5", 2, 1),
                                         ("D6+", 2, 7), ("D6-", 2, 7), ("D4+", 4, 1), ("D3", 3, 1),
                                         ("D4+", 3, 1), ("D5", 3, 41)])
def test_top_layers(desc, q, step):
    seen = check_layers(*_elements(desc, q, step))
    if q % 2:
        # lambda vanishes identically away from characteristic 2
        assert seen <= {"image"}


@pytest.mark.parametrize("q", [2, 4])
def test_representatives_of_larger_spaces(q):
    # the image-plus-line case first appears at D = 9 (label (3,0,3,0,3))
    seen = set()
    for desc in ("D7", "D8+", "D8-", "D9", "D10+", "D10-"):
        s = space(desc, q)
        reps = np.array([piece_representative(s, lab) for lab in admissible_labels(s.D, s.eta)])
        seen |= check_layers(s, reps)
    assert seen == {"line", "image", "image+line"}


def check_layers(s, Ns) -> set:
    F, D = s.ctx, s.D
    seen = set()
    for N in Ns:
        e = nilpotency_index(F, N)
        if e == 0:
            continue
        filt = canonical_filtration(s, N)
        L, lam = compute_line(s, N, e)
        red = reduce_once(s, N, e)
        e2 = nilpotency_index(F, red.N)
        lam2 = e2 > 0 and compute_line(red.space, red.N, e2)[1]
        top = Subspace(F, D, mat_pow(F, N, e - 1).T)
        if lam:
            seen.add("line")
            assert filt.X(e) == L
            assert filt.X(1 - e) == s.perp(L)
        elif e2 <= e - 2 or (e2 == e - 1 and not lam2):
            seen.add("image")
            assert filt.X(e - 1) == top
            ker = Subspace(F, D, nullspace(F, mat_pow(F, N, e - 1)))
            assert filt.X(2 - e) == ker
        else:
            seen.add("image+line")
            L2, _ = compute_line(red.space, red.N, e2)
            lifted = red.quotient.pullback(L2.basis)
            assert filt.X(e - 1) == top + lifted
            assert filt.X(e - 1).dim == top.dim + 1
    return seen
