import numpy as np
import pytest

from holophase import cli, selftest, uhlmann


def test_clean_run_passes():
    results = selftest.run()
    assert [r.name for r in results] == list(selftest.SUITES)
    assert all(r.passed for r in results), selftest.format_table(results)


def test_quick_run_passes():
    assert all(r.passed for r in selftest.run(quick=True))


def test_mutated_gamma_form_is_caught(monkeypatch, capsys):
    original = uhlmann.gamma_form_matrix

    def flipped(*args, **kwargs):
        m = np.array(original(*args, **kwargs), copy=True)
        m[..., 0, 1] *= -1
        return m

    monkeypatch.setattr(uhlmann, "gamma_form_matrix", flipped)
    by_name = {r.name: r for r in selftest.run()}
    assert not by_name["form-equivalence"].passed
    assert cli.main(["selftest"]) == cli.EXIT_SELFTEST
    assert "FAIL" in capsys.readouterr().out


def test_table_format():
    rows = [selftest.SuiteResult("a", True, "ok", 0.0), selftest.SuiteResult("long-name", False, "bad", 0.0)]
    text = selftest.format_table(rows)
    assert text.splitlines() == ["a          PASS  ok", "long-name  FAIL  bad"]
