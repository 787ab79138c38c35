import numpy as np
import pytest

from sopieces import kernels
from sopieces.census import unipotent_nilpotents
from sopieces.filtration import canonical_filtration
from sopieces.groups import enumerate_unipotents
from sopieces.kernels import _fallback

from conftest import beta_example, space

needs_core = pytest.mark.skipif(kernels._core is None, reason="compiled kernels not built")


def _sample(desc, q, step=1):
    s = space(desc, q)
    Ns = unipotent_nilpotents(s, enumerate_unipotents(s))
    return s, Ns[::step]


@needs_core
@pytest.mark.parametrize("desc,q,step", [("D3", 2, 1), ("D4+", 2, 1), ("D4-", 2, 1), ("D5", 2, 3),
                                         ("D3", 3, 1), ("D4+", 3, 5), ("D4-", 3, 5), ("D6+", 2, 97)])
def test_compiled_agrees_with_python(desc, q, step):
    s, Ns = _sample(desc, q, step)
    a = kernels.classify_batch(s, Ns, backend="compiled")
    b = kernels.classify_batch(s, Ns, backend="python")
    assert set(a) == set(b)
    for key in a:
        assert np.array_equal(a[key], b[key]), key


@needs_core
def test_compiled_agrees_without_shift():
    s, Ns = _sample("D4+", 2)
    a = kernels.classify_batch(s, Ns, keep_shift=False, backend="compiled")
    b = kernels.classify_batch(s, Ns, keep_shift=False, backend="python")
    for key in a:
        assert np.array_equal(a[key], b[key]), key


def test_hash_tracks_the_filtration():
    s, N = beta_example()
    h = _fallback.filtration_hash(canonical_filtration(s, N))
    out = kernels.classify_batch(s, N[None], backend="python")
    assert int(out["fhash"][0]) == h
    zero = kernels.classify_batch(s, np.zeros((1, 3, 3), dtype=np.int64), backend="python")
    assert int(zero["fhash"][0]) != h


def test_all_flags_on_adapted_elements():
    s, Ns = _sample("D4+", 2)
    out = kernels.classify_batch(s, Ns)
    assert np.all((out["flags"] & kernels.ADAPTED) == kernels.ADAPTED)


def test_non_nilpotent_input_is_flagged():
    s = space("D3", 2)
    out = kernels.classify_batch(s, np.eye(3, dtype=np.int64)[None])
    assert out["flags"][0] & kernels.FLAG_NILPOTENT == 0
    assert out["e"][0] == -1


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")
