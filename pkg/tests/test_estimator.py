import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from amcircle.corpus import SyntheticCorpusSpec, generate_corpus
from amcircle.estimator import AngularMarginEmbedder

SMALL = dict(epochs=4, batch_size=16, hidden_dim=16, embed_dim=8,
             chunk_intervals=((5, 10), (8, 12), (10, 15)), random_state=3)


@pytest.fixture(scope="module")
def noiseless():
    corpus = generate_corpus(SyntheticCorpusSpec(6, 8, 6, 15, 0.0, 0.0, seed=4))
    names = np.array([f"spk{k}" for k in range(6)])
    return corpus.frames, names[corpus.labels]


@pytest.fixture(scope="module")
def fitted(noiseless):
    X, y = noiseless
    params = {**SMALL, "epochs": 20}
    return AngularMarginEmbedder(loss="softmax", s=30.0, **params).fit(X, y)


class TestParams:
    def test_get_params_roundtrip(self):
        est = AngularMarginEmbedder(m=0.25, margin_mode="stage")
        params = est.get_params()
        assert params["m"] == 0.25 and params["margin_mode"] == "stage"
        assert clone(est).get_params() == params

    def test_set_params(self):
        est = AngularMarginEmbedder().set_params(lr=0.05, epochs=2)
        assert est.lr == 0.05 and est.epochs == 2

    def test_invalid_params_raise_on_fit(self, noiseless):
        X, y = noiseless
        with pytest.raises(ValueError):
            AngularMarginEmbedder(margin_mode="plateau", **SMALL).fit(X, y)


class TestFit:
    def test_attributes(self, fitted, noiseless):
        X, _ = noiseless
        assert list(fitted.classes_) == [f"spk{k}" for k in range(6)]
        assert fitted.n_features_in_ == X.shape[2]
        assert len(fitted.diagnostics_) == 20

    def test_transform_unit_norm(self, fitted, noiseless):
        X, _ = noiseless
        E = fitted.transform(X)
        assert E.shape == (len(X), SMALL["embed_dim"])
        np.testing.assert_allclose(np.linalg.norm(E, axis=1), 1.0, atol=1e-12)

    def test_decision_function_is_cosine(self, fitted, noiseless):
        X, _ = noiseless
        D = fitted.decision_function(X)
        assert D.shape == (len(X), 6)
        assert np.all(np.abs(D) <= 1 + 1e-12)

    def test_noiseless_accuracy(self, fitted, noiseless):
        X, y = noiseless
        assert fitted.score(X, y) == 1.0

    def test_reproducible(self, noiseless):
        X, y = noiseless
        a = AngularMarginEmbedder(loss="circle", **SMALL).fit(X, y).transform(X)
        b = AngularMarginEmbedder(loss="circle", **SMALL).fit(X, y).transform(X)
        np.testing.assert_array_equal(a, b)


class TestValidation:
    def test_not_fitted(self, noiseless):
        X, _ = noiseless
        with pytest.raises(NotFittedError):
            AngularMarginEmbedder().transform(X)

    def test_wrong_rank(self):
        with pytest.raises(ValueError):
            AngularMarginEmbedder(**SMALL).fit(np.zeros((4, 6)), [0, 0, 1, 1])

    def test_label_count(self, noiseless):
        X, y = noiseless
        with pytest.raises(ValueError):
            AngularMarginEmbedder(**SMALL).fit(X, y[:-1])

    def test_single_class(self, noiseless):
        X, _ = noiseless
        with pytest.raises(ValueError):
            AngularMarginEmbedder(**SMALL).fit(X, np.zeros(len(X)))

    def test_nan_rejected(self, noiseless):
        X, y = noiseless
        bad = X.copy()
        bad[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            AngularMarginEmbedder(**SMALL).fit(bad, y)

    def test_frame_dim_mismatch(self, fitted, noiseless):
        X, _ = noiseless
        with pytest.raises(ValueError):
            fitted.transform(X[:, :, :-1])
