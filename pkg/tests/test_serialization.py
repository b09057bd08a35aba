import json

import numpy as np
import pytest

from oncograde.core import derive_stream
from oncograde.models import Hyperparams, ModelSpec, load_model, model_from_doc, model_to_doc, save_model

ALL_NAMES = ("dnn", "voting", "bagging", "svm_rbf", "svm_linear", "svm_poly", "svm_sigmoid")


@pytest.mark.parametrize("name", ALL_NAMES)
def test_json_roundtrip_preserves_predictions(name, small_prepared, tmp_path):
    prep = small_prepared
    hp = Hyperparams(epochs=8, n_estimators=3, max_depth=3)
    model = ModelSpec(name, hp).train(
        prep.X_train, prep.y_train, derive_stream(11, 2), prep.X_test, prep.y_test
    )
    path = tmp_path / "model.json"
    save_model(model, path)
    restored = load_model(path)
    assert np.array_equal(model.predict_proba(prep.X_test), restored.predict_proba(prep.X_test))
    assert np.array_equal(model.predict(prep.X_test), restored.predict(prep.X_test))
    # a second serialization round produces identical bytes
    save_model(restored, tmp_path / "model2.json")
    assert (tmp_path / "model.json").read_bytes() == (tmp_path / "model2.json").read_bytes()


def test_document_is_versioned_and_tagged(small_prepared):
    prep = small_prepared
    model = ModelSpec("bagging", Hyperparams(n_estimators=2, max_depth=2)).train(
        prep.X_train, prep.y_train, derive_stream(1, 2)
    )
    doc = model_to_doc(model)
    assert doc["version"] == 1
    assert doc["family"] == "bagging"
    json.dumps(doc)  # must be JSON-serializable as-is


def test_unknown_family_rejected():
    with pytest.raises(ValueError, match="unknown model family"):
        model_from_doc({"version": 1, "family": "forest", "params": {}})


def test_unknown_version_rejected():
    with pytest.raises(ValueError, match="version"):
        model_from_doc({"version": 99, "family": "tree", "params": {}})
