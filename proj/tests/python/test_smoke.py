"""End-to-end smoke test for the python bindings.

Runs standalone (python3 test_smoke.py) or under pytest.
"""

import math
import os
import sys
import tempfile

import anthrofit


def test_template_and_profile():
    mesh = anthrofit.make_template("blob", 8)
    assert mesh.vertex_count() > 0
    assert mesh.vertices.shape == (mesh.vertex_count(), 3)
    assert len(mesh.triangles) == mesh.triangle_count()

    profile = anthrofit.face_profile(8)
    assert len(profile) == 7
    values = anthrofit.measure_all(mesh, profile)
    assert set(values) == set(profile.names())
    assert all(v > 0 for v in values.values())


def test_obj_roundtrip():
    mesh = anthrofit.make_template("blob", 8)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "blob.obj")
        anthrofit.write_obj(path, mesh)
        back = anthrofit.read_obj(path)
    assert back.vertex_count() == mesh.vertex_count()
    assert back.triangles == mesh.triangles
    # OBJ vertices carry 9 significant digits.
    scale = abs(mesh.vertices).max()
    assert abs(back.vertices - mesh.vertices).max() < 1e-8 * scale


def test_errors_are_typed():
    try:
        anthrofit.make_template("teapot", 8)
    except anthrofit.InputError:
        pass
    else:
        raise AssertionError("expected InputError")


def test_train_predict_roundtrip():
    meshes = anthrofit.sample_meshes("blob", 8, count=12, modes=4, seed=3)
    profile = anthrofit.face_profile(8)
    model = anthrofit.train_model(meshes, profile)
    assert model.rank > 0

    targets = anthrofit.measure_all(meshes[0], profile)
    predicted, report = anthrofit.predict_shape(model, targets, report=True)
    assert predicted.vertex_count() == meshes[0].vertex_count()
    assert "stage1" in report and "stage2" in report

    fitted = anthrofit.measure_all(predicted, profile)
    for name, want in targets.items():
        assert math.isfinite(fitted[name])
        assert abs(fitted[name] - want) / want < 0.02, name

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.json")
        anthrofit.write_model(path, model)
        back = anthrofit.read_model(path)
    assert back.rank == model.rank
    assert back.profile.names() == profile.names()


def test_gradcheck():
    rows = anthrofit.check_gradients(seed=1, cases=2)
    assert len(rows) == 5
    for term, err, ok in rows:
        assert ok, f"{term}: {err}"


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"{test.__name__}: ok")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
