#!/usr/bin/env python3
"""Smoke test for the doccg_py extension module.

Builds the cdylib with cargo, loads it, and exercises the category
algebra, λ-terms, single-sentence parsing, and the full document run.
"""

import json
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "crates" / "core" / "tests" / "fixtures"


def build_and_import():
    subprocess.run(["cargo", "build", "-p", "doccg-py"], cwd=REPO, check=True)
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    stage = Path(tempfile.mkdtemp(prefix="doccg-py-"))
    shutil.copy(REPO / "target" / "debug" / "libdoccg_py.so", stage / f"doccg_py{suffix}")
    sys.path.insert(0, str(stage))
    import doccg_py

    return doccg_py


def main():
    doccg_py = build_and_import()

    # category algebra
    c = doccg_py.Category("(S[dcl]\\NP)/NP")
    assert str(c) == "(S[dcl]\\NP)/NP"
    assert c.is_functor() and not c.is_modifier()
    assert str(c.simplify()) == "(S\\NP)/NP"
    results = c.combine(doccg_py.Category("NP"))
    assert any(str(cat) == "S[dcl]\\NP" and label == ">" for cat, label in results), results
    assert doccg_py.Category("N/N").is_modifier()
    assert doccg_py.Category("NP") == doccg_py.Category("NP")

    # λ-terms
    ident = doccg_py.Term(r"\x.x")
    run = doccg_py.Term(r"\x.run x")
    john = doccg_py.Term("john")
    # reduction canonicalizes bound-variable names, so compare normal forms
    assert ident.apply(run) == run.reduce()
    assert run.apply(john).formula() == "run(john)"

    # consistency potentials
    nn = doccg_py.Category("N/N")
    vp = doccg_py.Category("S[ng]\\NP")
    assert doccg_py.pair_potential(nn, vp) == 0.9
    assert doccg_py.pair_potential(nn, None, delta2=0.2, delta3=0.2) == 0.2
    assert doccg_py.pair_potential(doccg_py.Category("NP"), doccg_py.Category("N")) == 0.0

    # single-sentence A* parse
    sentence = {
        "tokens": ["old", "dog"],
        "categories": ["N/N", "N"],
        "tag_log_prob": [[-0.1, -3.0], [-3.0, -0.1]],
        "dep_log_prob": [[-0.5, -0.5, -0.5], [-0.5, -0.5, -0.5]],
    }
    parsed = json.loads(doccg_py.parse_sentence(json.dumps(sentence)))
    assert parsed["categories"] == ["N/N", "N"], parsed
    # heads are 1-based token indices with 0 for the root
    assert parsed["heads"] == [2, 0], parsed
    exhaustive = json.loads(doccg_py.parse_sentence(json.dumps(sentence), exhaustive=True))
    assert exhaustive == parsed

    # full document run on the bundled example: joint decoding flips the
    # hypothesis reading of "exercising" from N/N to S[ng]\NP
    doc = (FIXTURES / "exercising-doc.json").read_text()
    cfg = (FIXTURES / "exercising-config.json").read_text()
    out = json.loads(doccg_py.run_document(doc, cfg))
    assert out["converged"] is True
    h = out["sentences"][1]
    assert h["baseline"]["categories"][1] == "N/N"
    assert h["joint"]["categories"][1] == "S[ng]\\NP"
    assert h["baseline_formula"] != h["joint_formula"]

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
