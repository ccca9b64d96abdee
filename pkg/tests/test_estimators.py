import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from infodyn.constraints import Expectation
from infodyn.estimators import EntropicProjector
from infodyn.matkernel import PAULI_Z, random_state


def test_fit_transform_batch():
    q = Expectation((PAULI_Z,), (0.5,), normalize=True)
    est = EntropicProjector(gamma=0.0, constraints=q)
    out = est.fit_transform(np.array([np.eye(2) / 2, random_state(2, 1)]))
    assert out.shape == (2, 2, 2)
    assert np.allclose(out[0], np.diag([0.75, 0.25]), atol=1e-8)
    assert est.divergences().shape == (2,)


def test_params_roundtrip():
    est = EntropicProjector(gamma=0.3, order="reverse", tol=1e-8)
    assert est.get_params()["gamma"] == 0.3
    assert clone(est).get_params()["order"] == "reverse"


def test_validation():
    with pytest.raises(ValueError):
        EntropicProjector(gamma=2.0).fit(np.eye(2)[None] / 2)
    with pytest.raises(ValueError):
        EntropicProjector(order="sideways").fit(np.eye(2)[None] / 2)
    with pytest.raises(NotFittedError):
        EntropicProjector().transform(np.eye(2)[None] / 2)
    with pytest.raises(Exception):
        EntropicProjector().fit(np.diag([1.0, -1.0])[None])
    est = EntropicProjector().fit(np.eye(2)[None] / 2)
    with pytest.raises(Exception):
        est.transform(np.eye(3)[None] / 3)
