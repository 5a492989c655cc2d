import numpy as np
import pytest

import structcomp as sc


@pytest.fixture(scope="module")
def sbm():
    return sc.gen_sbm(n=200, seed=1)


def test_partition_and_compress(sbm):
    x = sbm["features"]
    assign = sc.partition(sbm["edges"], 200, 20, seed=0)
    assert assign.shape == (200,)
    assert set(assign.tolist()) == set(range(20))
    xc = sc.compress_features(x, assign, 20)
    assert xc.shape == (20, x.shape[1])
    np.testing.assert_allclose(xc[assign[0]], x[assign == assign[0]].mean(axis=0), atol=1e-14)
    np.testing.assert_allclose(sc.compress_features(sc.lift(xc, assign), assign, 20), xc, atol=1e-14)


def test_train_infer_probe(sbm):
    res = sc.train(sbm["edges"], sbm["features"], model="sce", n_clusters=20, epochs=30, weighted_laplacian=True)
    assert len(res["loss"]) == 30
    z = sc.embed(sbm["edges"], sbm["features"], res)
    assert z.shape[0] == 200
    acc = sc.linear_probe(z, sbm["labels"], np.array(sbm["train"]), np.array(sbm["test"]))
    assert acc > 0.8


def test_training_is_deterministic(sbm):
    kw = dict(model="grace", n_clusters=20, epochs=3, hidden=16, embed_dim=8, activations=["relu", "identity"])
    a = sc.train(sbm["edges"], sbm["features"], **kw)
    b = sc.train(sbm["edges"], sbm["features"], **kw)
    for wa, wb in zip(a["weights"], b["weights"]):
        np.testing.assert_array_equal(wa, wb)


def test_theory():
    assert sc.check_theorem1(200, 0.05, 20, seed=3)["holds"]
    assert sc.check_appendix_c(30, 6, 8, 16, 4) <= 1e-12


def test_errors(sbm):
    with pytest.raises(ValueError):
        sc.partition(sbm["edges"], 200, 0)
    with pytest.raises(ValueError):
        sc.compress_features(np.zeros(5), np.zeros(5, dtype=np.int64), 1)
    with pytest.raises(sc.DataError):
        sc.train(sbm["edges"], sbm["features"], bogus=1)
