import pytest

import twc

SMALL = dict(n=6, dim=3, repeat=2, vector_length=12)


def test_kernel_list():
    assert "MATRIX" in twc.KERNELS
    assert len(twc.KERNELS) == 7
    assert twc.DEFAULT_WINDOWS[-1] == "inf"


@pytest.mark.parametrize("mode,window", [("strict", None), ("decoupled", None), ("twc", 3), ("twc", "inf")])
def test_run_matches_oracle(mode, window):
    out = twc.run("MATRIX-DEP", mode=mode, window=window, verify=True, **SMALL)
    assert out["verified"]
    assert out["cycles"] > 0
    assert out["mode"] == mode


def test_twc_faster_than_strict():
    strict = twc.run("MATRIX", **SMALL)
    spec = twc.run("MATRIX", mode="twc", **SMALL)
    assert spec["window"] == "inf"
    assert spec["cycles"] < strict["cycles"]
    assert spec["raw"] == 0


def test_sweep_rows():
    rows = twc.sweep("VECTOR-FULL-DEP", windows=[2, "inf"], **SMALL)
    assert [r["mode"] for r in rows] == ["strict", "decoupled", "twc", "twc"]
    assert [r["window"] for r in rows] == [None, None, 2, "inf"]
    assert rows[0]["speedup_pct"] == 0
    base = rows[0]["cycles"]
    assert rows[3]["speedup_pct"] == pytest.approx(twc.speedup_pct(base, rows[3]["cycles"]))


def test_program_text_roundtrip():
    text = twc.build_kernel("MATRIX-STORES", **SMALL)
    assert twc.validate(text) == []
    want = twc.interpret(text)
    got = twc.simulate(text, mode="twc", window=5)
    assert twc.compare_memory(want, got["memory"]) == []


def test_bad_arguments():
    with pytest.raises(ValueError):
        twc.run("NOPE")
    with pytest.raises(ValueError):
        twc.run("MATRIX", mode="fast")
    with pytest.raises(ValueError):
        twc.run("MATRIX", mode="twc", window="wide")
