import copy
import io
import json

import pytest
import yaml

from warpcurv import __version__
from warpcurv.catalog import UnknownCatalogError, catalog, entry, names
from warpcurv.cli import main
from warpcurv.manifest import ManifestError, load_manifest, validate
from warpcurv.suite import SUITES, run_suite, sample

H3 = {
    "name": "h3",
    "base": {"coords": ["t"], "metric": [["1"]], "box": [[-1, 1]]},
    "fiber": {"coords": ["x", "y"], "metric": [["1", "0"], ["1"]], "box": [[-1, 1], [-1, 1]]},
    "warping": "exp(t)",
    "generators": {"U": {"on": "base", "components": ["1"]}},
    "qe": {"a": 2, "b": 0},
}


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write(tmp_path, data, name="m.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


# -- manifests ---------------------------------------------------------------------------


def test_valid_manifest(tmp_path):
    m = load_manifest(write(tmp_path, H3))
    assert m.wp.ambient.coords == ("t", "x", "y")
    assert m.qe.a == 2.0 and m.P is None and m.family is None
    assert m.tolerances == {"identity": 1e-7, "fit": 1e-8}
    assert m.sampling == {"points": 50, "seed": 42}


def test_missing_base_names_the_field():
    data = {k: v for k, v in H3.items() if k != "base"}
    with pytest.raises(ManifestError) as info:
        validate(data)
    assert info.value.path == "base"


def test_fiber_coordinate_in_warping():
    data = copy.deepcopy(H3)
    data["warping"] = "exp(t) + x"
    with pytest.raises(ManifestError) as info:
        validate(data)
    assert info.value.path == "warping" and "other factor" in info.value.reason


def test_parse_error_has_location():
    data = copy.deepcopy(H3)
    data["fiber"]["metric"] = [["1", "0"], ["1 + (y"]]
    with pytest.raises(ManifestError) as info:
        validate(data)
    assert info.value.path == "fiber.metric[1][0]"
    assert "offset" in info.value.reason


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["base"].update(box=[[1, 0]]), "base.box[0]"),
        (lambda d: d["base"].pop("box"), "base.box"),
        (lambda d: d["fiber"].update(coords=["t", "y"]), "fiber.coords"),
        (lambda d: d.update(P={"on": "base", "components": ["1", "2"]}), "P.components"),
        (lambda d: d.update(P={"on": "side", "components": ["1"]}), "P.on"),
        (lambda d: d["qe"].update(c=1.0), "qe.c"),
        (lambda d: d.pop("generators"), "qe"),
        (lambda d: d.update(sampling={"points": 1}), "sampling.points"),
        (lambda d: d.update(extra=1), ""),
    ],
)
def test_validation_paths(mutate, path):
    data = copy.deepcopy(H3)
    mutate(data)
    with pytest.raises(ManifestError) as info:
        validate(data)
    assert info.value.path == path


def test_unquoted_on_key(tmp_path):
    # plain YAML 1.1 would read `on` as a boolean key
    p = tmp_path / "on.yaml"
    p.write_text(
        "base: {coords: [t], metric: [['1']], box: [[-1, 1]]}\n"
        "fiber: {coords: [x], metric: [['1']], box: [[-1, 1]]}\n"
        "warping: exp(t)\n"
        "P: {on: fiber, components: ['1']}\n"
    )
    assert load_manifest(p).P.location == "fiber"


def test_io_errors(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("base: [unclosed")
    with pytest.raises(ManifestError):
        load_manifest(bad)


# -- catalog -----------------------------------------------------------------------------


def test_catalog_names():
    assert sorted(names()) == [
        "flat-trivial",
        "hyperbolic2-ssnm",
        "hyperbolic3",
        "minkowski-flat",
        "polar-plane",
        "r-cross-s2",
        "unit-sphere-warped",
    ]
    for n in names():
        validate(entry(n))


def test_catalog_fixtures():
    m = catalog("unit-sphere-warped")
    assert m.wp.base.coords == ("t",) and m.wp.fiber.dim == 1
    assert str(m.wp.f) == "sin(t)"
    assert catalog("hyperbolic2-ssnm").P.location == "base"


def test_unknown_catalog():
    with pytest.raises(UnknownCatalogError):
        catalog("nonexistent")
    assert issubclass(UnknownCatalogError, ManifestError)


def test_random_entries_are_deterministic():
    assert entry("random-7") == entry("random-7")
    assert entry("random-7") != entry("random-8")
    m = catalog("random-8")
    assert m.P is not None and m.P.location == "base"
    assert catalog("random-7").P.location == "fiber"


def test_entries_are_frozen():
    e = entry("flat-trivial")
    e["warping"] = "2"
    assert entry("flat-trivial")["warping"] == "1"


# -- suites ------------------------------------------------------------------------------


def test_flat_trivial_all_zero():
    rep = run_suite(catalog("flat-trivial"))
    assert rep.passed and rep.suite == "all"
    for r in rep.records:
        assert r.max_error in (0.0, None), r
    assert {r.id.split(".")[0] for r in rep.records} == set(SUITES)


def test_hyperbolic3_lemmas():
    rep = run_suite(catalog("hyperbolic3"), "lemmas")
    assert rep.passed
    ids = {r.id for r in rep.records}
    assert "lemmas.base.curvature.B2" in ids and "lemmas.fiber.scalar.F" in ids
    assert all(r.max_error <= 1e-7 for r in rep.records)


def test_r_cross_s2_einstein():
    rep = run_suite(catalog("r-cross-s2"), "einstein")
    assert rep.passed
    fits = [r for r in rep.records if r.id == "einstein.base.fit"]
    assert len(fits) == 1 and fits[0].kind == "assert"
    assert "a=-1" in fits[0].detail.replace(" ", "")


def test_sampling_is_in_box_and_seeded():
    m = catalog("unit-sphere-warped")
    a, b = sample(m, 10, 3), sample(m, 10, 3)
    assert (a == b).all()
    assert (a[:, 0] >= 0.2).all() and (a[:, 0] <= 3.0).all()


def test_errors_become_failed_records():
    data = copy.deepcopy(H3)
    data["warping"] = "t"  # not positive on half the box
    rep = run_suite(validate(data), "lemmas", points=8)
    assert not rep.passed
    assert any("positive" in r.detail for r in rep.records)


def test_report_is_deterministic():
    m = catalog("hyperbolic2-ssnm")
    a = run_suite(m, seed=42).to_json()
    b = run_suite(m, seed=42).to_json()
    assert a == b
    d = json.loads(a)
    assert d["engine"] == __version__ and d["seed"] == 42
    assert [r["id"] for r in d["records"]] == sorted(r["id"] for r in d["records"])


def test_report_floats_round_trip():
    rep = run_suite(catalog("random-3"), "ssnm")
    back = json.loads(rep.to_json())
    for rec, r in zip(back["records"], sorted(rep.records, key=lambda r: r.id)):
        assert rec["max_error"] == r.max_error


# -- command line ------------------------------------------------------------------------


def test_check_exit_codes(tmp_path):
    code, out = run("check", "--catalog", "flat-trivial", "--suite", "lemmas")
    assert code == 0 and "passed" in out
    bad = copy.deepcopy(H3)
    bad["qe"] = {"a": 5, "b": 0}  # wrong Einstein constant: defect check fails
    code, _ = run("check", "--manifest", str(write(tmp_path, bad)), "--suite", "einstein", "--points", "5")
    assert code == 1
    invalid = {k: v for k, v in H3.items() if k != "fiber"}
    code, _ = run("check", "--manifest", str(write(tmp_path, invalid, "i.yaml")), "--suite", "all")
    assert code == 2
    assert run("check", "--catalog", "nope")[0] == 2
    assert run("check")[0] == 2
    assert run("check", "--catalog", "flat-trivial", "--points", "1")[0] == 2


def test_check_writes_report(tmp_path):
    path = tmp_path / "r.json"
    code, _ = run("check", "--manifest", str(write(tmp_path, H3)), "--suite", "all", "--report", str(path))
    assert code == 0
    first = path.read_bytes()
    run("check", "--manifest", str(write(tmp_path, H3)), "--suite", "all", "--report", str(path))
    assert path.read_bytes() == first
    assert json.loads(first)["summary"]["ok"] is True


def test_overrides():
    _, out = run("check", "--catalog", "polar-plane", "--suite", "ssnm", "--points", "7", "--seed", "3")
    assert "seed=3" in out
    d = json.loads(run_suite(catalog("polar-plane"), "ssnm", points=7, seed=3).to_json())
    assert d["points"] == 7


def test_catalog_command():
    code, out = run("catalog", "--list")
    assert code == 0 and out.split() == names() + ["random-<seed>"]
    code, out = run("catalog", "--show", "hyperbolic3")
    assert code == 0
    assert yaml.safe_load(out) == entry("hyperbolic3")
    assert run("catalog", "--show", "nope")[0] == 2


def test_curvature_command(tmp_path):
    code, out = run("curvature", "--catalog", "hyperbolic2-ssnm", "--at", "0.0,0.5")
    assert code == 0
    for key in ("g:", "Gamma[k,i,j]:", "Gammabar[k,i,j]:", "Ric:", "Ricbar:", "S:", "Sbar:"):
        assert key in out
    sbar = float(out.split("Sbar:")[1].split()[0])
    assert sbar == pytest.approx(2.0, abs=1e-12)
    assert run("curvature", "--catalog", "hyperbolic2-ssnm", "--at", "0.0")[0] == 2
    assert run("curvature", "--catalog", "hyperbolic2-ssnm", "--at", "a,b")[0] == 2
    code, out = run("curvature", "--manifest", str(write(tmp_path, H3)), "--at", "0,0,0")
    assert code == 0 and float(out.split("S:")[1].split()[0]) == pytest.approx(6.0)
