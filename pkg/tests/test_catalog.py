import numpy as np
import pytest

from wqcm.catalog import UnknownCatalogKey, catalog, keys
from wqcm.classify import class_residuals, validate_axioms
from wqcm.structure import WeakACM
from conftest import points_for


def test_keys_listing():
    assert keys() == ["sasakian-r3", "sasakian-r5", "sasakian-r7", "scaled", "flat-const"]
    for key in keys():
        sdef = catalog(key, s=2.0) if key == "scaled" else catalog(key)
        assert sdef.dim == 2 * sdef.n + 1


@pytest.mark.parametrize("s", [0.5, 2.0, 3.0])
def test_scaled_family_satisfies_axioms(s):
    acm = WeakACM(catalog("scaled", n=1, s=s))
    rep = validate_axioms(acm, points_for(acm, count=6))
    assert rep.passed, rep.failures


@pytest.mark.parametrize("s", [0.5, 2.0, 3.0])
def test_scaled_canonical_quasi_residual(s):
    acm = WeakACM(catalog("scaled", n=1, s=s))
    rep = class_residuals(acm, points_for(acm, count=4))
    expected = abs(s + s**3 - 2.0)
    assert rep.classes["quasi"].canonical_residual == pytest.approx(expected, abs=1e-6)


def test_scaled_s1_matches_sasakian(sasakian_r3):
    scaled1 = WeakACM(catalog("scaled", n=1, s=1.0))
    a = class_residuals(scaled1, points_for(scaled1, count=6))
    b = class_residuals(sasakian_r3, points_for(sasakian_r3, count=6))
    for name in a.classes:
        assert a.classes[name].verdict == b.classes[name].verdict, name


def test_sasakian_higher_dimensions():
    for key, dim in (("sasakian-r5", 5), ("sasakian-r7", 7)):
        acm = WeakACM(catalog(key))
        assert acm.dim == dim
        st = acm.at(np.zeros(dim))
        assert np.allclose(st.Q, np.eye(dim), atol=1e-12)
        assert np.allclose(st.deta_form, st.Phi, atol=1e-12)


def test_flat_const_is_not_contact():
    acm = WeakACM(catalog("flat-const"))
    st = acm.at(np.array([0.3, -0.2, 0.5]))
    assert np.max(np.abs(st.deta_form)) == 0.0
    assert np.max(np.abs(st.Phi)) == 1.0


@pytest.mark.parametrize(
    "call",
    [
        lambda: catalog("nope"),
        lambda: catalog("sasakian-r4"),
        lambda: catalog("sasakian-r2"),
    ],
)
def test_unknown_keys(call):
    with pytest.raises(UnknownCatalogKey):
        call()


def test_parameter_validation():
    with pytest.raises(ValueError):
        catalog("scaled")  # s is required
    with pytest.raises(ValueError):
        catalog("scaled", s=-1.0)
    with pytest.raises(ValueError):
        catalog("scaled", n=9, s=2.0)
    with pytest.raises(ValueError):
        catalog("sasakian-r99")
