"""Away from characteristic 2 the canonical filtration is the weight filtration of N."""
import numpy as np
import pytest

from sopieces.census import census, unipotent_nilpotents
from sopieces.filtration import canonical_filtration
from sopieces.linalg import Subspace, mat_pow, nullspace
from sopieces.nilpotent import nilpotency_index

from conftest import space


def weight_filtration(F, N):
    """start, chain of X^{>=a} from a Jordan basis: N^i v sits in degree 2i - (k-1)."""
    D = N.shape[0]
    e = max(nilpotency_index(F, N), 1)   # N = 0: everything in degree 0
    kers = [Subspace(F, D, nullspace(F, mat_pow(F, N, k))) if k else Subspace.zero(F, D)
            for k in range(e + 1)]
    spanned = Subspace.zero(F, D)
    graded = []   # (degree, vector)
    for k in range(e, 0, -1):
        base = kers[k - 1] + (spanned & kers[k])
        for v in kers[k].basis:
            if base.contains(v):
                continue
            chain = [v]
            for _ in range(k - 1):
                chain.append(F.matmul(N, chain[-1][:, None])[:, 0])
            graded += [(2 * i - (k - 1), w) for i, w in enumerate(chain)]
            base = base + Subspace(F, D, v[None, :])
            spanned = spanned + Subspace(F, D, np.array(chain))
    assert spanned.dim == D

    def X(a):
        vecs = [w for d, w in graded if d >= a]
        return Subspace(F, D, np.array(vecs)) if vecs else Subspace.zero(F, D)

    return X


@pytest.mark.parametrize("desc,q,step", [("D3", 3, 1), ("D4+", 3, 1), ("D4-", 3, 1), ("D5", 3, 7),
                                         ("D3", 5, 1), ("D4+", 5, 1), ("D4-", 5, 1), ("D5", 5, 211)])
def test_matches_weight_filtration(desc, q, step):
    s = space(desc, q)
    F = s.ctx
    Ns = unipotent_nilpotents(s, census(s).unipotents)
    # always include the most and second most regular elements
    idx = sorted(set(range(0, len(Ns), step)) |
                 set(np.argsort([-nilpotency_index(F, N) for N in Ns], kind="stable")[:40].tolist()))
    for i in idx:
        N = Ns[i]
        filt = canonical_filtration(s, N)
        X = weight_filtration(F, N)
        for a in range(-s.D, s.D + 2):
            assert filt.X(a) == X(a), (i, a)
