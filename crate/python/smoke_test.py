"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
Run with:                 python3 python/smoke_test.py   (or pytest python/)
"""

from pathlib import Path

import manyval

DATA = Path(__file__).resolve().parent.parent / "data"


def test_godel_covers_ipc():
    for m in range(2, 5):
        report = manyval.check("builtin:ipc", manyval.godel(m))
        assert report["verdict"] == "cover"


def test_bernays_fails_a10():
    report = manyval.check("builtin:ipc", (DATA / "bernays.mat").read_text())
    failing = [a["name"] for a in report["axioms"] if not a["tautology"]]
    assert failing == ["a10"]


def test_falsify_finds_bernays():
    cal = (DATA / "ipc_minus_a10.cal").read_text()
    out = manyval.falsify(cal, "a10", 2)
    assert out["outcome"] == "found"


def test_compare_goedel_chain():
    out = manyval.compare(manyval.godel(3), manyval.godel(2))
    assert out["answer"] == "yes"
    assert out["proof"]["kind"] == "witness"
    back = manyval.compare(manyval.godel(2), manyval.godel(3))
    assert back["answer"] == "no"


def test_triangle_covers_are_trivial():
    mats = manyval.covers("builtin:triangle", 2)
    assert mats
    assert all(m.count("designated: 0 1") == 1 for m in mats)
    assert manyval.covers("builtin:triangle", 2, include_trivial=False) == []


def test_kripke_tree():
    mat = manyval.kripke_to_matrix((DATA / "tree3.kri").read_text())
    assert mat == (DATA / "t3.mat").read_text()


def test_bad_input_raises():
    try:
        manyval.check("builtin:nope", manyval.godel(2))
    except ValueError as e:
        assert "nope" in str(e)
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
