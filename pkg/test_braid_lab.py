"""
Tests for the braid_lab command line, its configuration and report writing
"""
import contextlib
import io
import json
import logging
import os
import tempfile

import pytest

from braid_lab import EXIT_CAP, EXIT_FAILED, EXIT_OK, EXIT_USAGE, WordParseError, main, parse_pattern, parse_word
from braid_core import BraidWord, SimpleBraid, normal_form, x_A, x_B
from config import ConfigError, RunConfig
from report_writer import render_csv, render_json
from run_logger import get_log_file, setup_logging


def run(*argv):
    """main() with logging kept off disk; returns (exit code, stdout, stderr)"""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv) + ["--log-dir", ""])
    return code, out.getvalue(), err.getvalue()


def test_parse_word():
    assert parse_word("s1 S2", 3) == BraidWord.from_signed(3, [1, -2])
    assert parse_word("", 4) == BraidWord(4)
    assert normal_form(parse_word("D", 4)) == normal_form(parse_word("s1 s2 s1 s3 s2 s1", 4))
    assert normal_form(parse_word("D d", 3)).p == 0


def test_parse_word_errors():
    with pytest.raises(WordParseError) as info:
        parse_word("s1 x2", 3)
    assert info.value.position == 2
    with pytest.raises(WordParseError) as info:
        parse_word("s1 s2 s3", 3)
    assert info.value.position == 3


def test_parse_pattern():
    assert parse_pattern("xA", 4) == x_A(4)
    assert parse_pattern("x_B", 3) == x_B(3)
    assert parse_pattern("s1 . s1 s2", 3).factors == (SimpleBraid.generator(3, 1), SimpleBraid.from_word(3, [1, 2]))
    with pytest.raises(WordParseError):
        parse_pattern("s1 . S2", 3)


def test_nf_output():
    code, out, _ = run("nf", "--n", "3", "s2 s1 s2")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "D^1 |"

    code, out, _ = run("nf", "--n", "3", "s1 S2")
    assert out.splitlines()[0] == "D^-1 | s2 . s2 s1"
    assert "rigid yes" in out

    code, out, _ = run("nf", "--n", "3")
    assert out.splitlines()[0] == "D^0 |"
    assert "rigid n/a" in out


def test_nf_json():
    code, out, _ = run("nf", "--n", "3", "--json", "s1 s1")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload == {'n': 3, 'normal_form': "D^0 | s1 . s1", 'inf': 0, 'sup': 2, 'length': 2, 'rigid': True}


def test_usage_errors():
    code, _, err = run("nf", "--n", "3", "s1 q")
    assert code == EXIT_USAGE
    assert "token 2" in err
    assert run("nf", "--n", "9", "s1")[0] == EXIT_USAGE
    assert run("bogus")[0] == EXIT_USAGE
    assert run("certify", "--n", "3", "s1 s2")[0] == EXIT_USAGE
    assert run("counts", "--n", "3", "--patterns", "s1 . s2")[0] == EXIT_USAGE


def test_counts_csv():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "counts.csv")
        code, out, _ = run("counts", "--n", "3", "--lmax", "4", "--format", "csv", "--out", path)
        assert code == EXIT_OK
        assert path in out
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        comments = [line for line in lines if line.startswith("#")]
        body = [line for line in lines if not line.startswith("#")]
        assert comments[0] == "# n=3"
        assert body[0] == "l,N,N°,N_w,N°_w"
        assert body[1:] == [f"{l},{4 * 2 ** l},{2 ** (l + 1)},," for l in range(5)]


def test_counts_with_patterns_json():
    code, out, _ = run("counts", "--n", "3", "--lmax", "3", "--patterns", "xA")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload['patterns'] == ["s1 . s1 s2"]
    assert payload['rows'][1]['N_w'] == "7"


def test_reports_are_reproducible():
    with tempfile.TemporaryDirectory() as tmp:
        first, second = os.path.join(tmp, "a.json"), os.path.join(tmp, "b.json")
        args = ("sample", "--n", "3", "--r", "20", "--samples", "200", "--seed", "4", "--threads", "2")
        assert run(*args, "--out", first)[0] == EXIT_OK
        assert run(*args, "--out", second)[0] == EXIT_OK
        with open(first, "rb") as f1, open(second, "rb") as f2:
            assert f1.read() == f2.read()


def test_sample_without_samples_fails():
    code, out, err = run("sample", "--n", "3", "--r", "10", "--samples", "0")
    assert code == EXIT_FAILED
    assert json.loads(out)['error'] == "no samples requested"
    assert "no samples requested" in err


def test_sample_proportions_table_csv():
    code, out, _ = run("sample", "--n", "3", "--r-values", "20", "40", "--samples", "0", "--format", "csv")
    assert code == EXIT_OK
    body = [line for line in out.splitlines() if line and not line.startswith("#")]
    assert body[0] == "l,exact_bound_num,exact_bound_den,sampled,ci_lo,ci_hi"
    assert [line.split(",")[0] for line in body[1:]] == ["19", "39"]
    assert all(line.endswith(",,,") for line in body[1:])


def test_sample_proportions_on_worker_processes():
    args = ("sample", "--n", "3", "--r-values", "20", "--samples", "600", "--seed", "2")
    code, out, _ = run(*args, "--threads", "2")
    assert code == EXIT_OK
    rows = json.loads(out)['rows']
    assert rows[0]['l'] == "19"
    assert rows[0]['sampled'] != ''
    assert json.loads(run(*args, "--threads", "1")[1]) == json.loads(out)


def test_certify_command():
    code, out, _ = run("certify", "--n", "3", "s1 s1")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload['kind'] == "ReducibilityWitness"
    assert payload['detail'] == {'type': 'PreservedRoundCurve', 'k': 1, 'curve': [1, 2]}
    assert payload['normal_form'] == "D^0 | s1 . s1"


def test_sphere_and_ball_commands():
    code, out, _ = run("sphere", "--n", "3", "--lmax", "4", "--format", "csv")
    assert code == EXIT_OK
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "l,shape_i,shape_ii,shape_iii,total"
    assert [line.split(",")[-1] for line in body[1:]] == ["10", "34", "90", "218"]

    code, out, _ = run("ball", "--n", "3", "--lmax", "2", "--rigid")
    rows = json.loads(out)['rows']
    assert [row['ball'] for row in rows] == ["11", "45"]
    assert all('rigid_pa_even_k' in row for row in rows)


def test_graph_and_spectrum_commands():
    code, out, _ = run("graph", "--n", "4")
    assert code == EXIT_OK
    assert "22 vertices" in out

    code, out, _ = run("spectrum", "--n", "3")
    spectra = json.loads(out)['spectra']
    assert abs(spectra[0]['gamma'] - 2.0) < 1e-9
    assert all(entry['gamma'] < 2.0 for entry in spectra[2:])


def test_lift_cap_exit_code():
    code, _, err = run("spectrum", "--n", "4", "--lift-cap", "10")
    assert code == EXIT_CAP
    assert "cap" in err


def test_graph_cache_option():
    with tempfile.TemporaryDirectory() as tmp:
        assert run("graph", "--n", "3", "--cache", tmp)[0] == EXIT_OK
        assert os.path.exists(os.path.join(tmp, "lw_graph_n3.json"))


def test_verify_n3():
    code, out, _ = run("verify", "--n", "3", "--samples", "300", "--threads", "1")
    assert code == EXIT_OK
    assert "✗" not in out


def test_run_config():
    assert RunConfig(n=5).validate().n == 5
    for bad in (dict(n=2), dict(n=8), dict(r=0), dict(samples=-1), dict(fmt='xml'), dict(threads=0), dict(lift_cap=0)):
        with pytest.raises(ConfigError):
            RunConfig(**bad).validate()
    with pytest.raises(ConfigError):
        RunConfig.from_env(colour='red')


def test_run_config_environment():
    saved = {key: os.environ.get(key) for key in ('BRAID_LAB_MAX_N', 'BRAID_LAB_THREADS')}
    try:
        os.environ['BRAID_LAB_MAX_N'] = '8'
        os.environ['BRAID_LAB_THREADS'] = '3'
        config = RunConfig.from_env(n=8)
        assert config.validate().max_n == 8
        assert config.threads == 3
        assert RunConfig.from_env(threads=1).threads == 1
        os.environ['BRAID_LAB_THREADS'] = 'many'
        with pytest.raises(ConfigError):
            RunConfig.from_env()
    finally:
        for key, value in saved.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value


def test_report_rendering():
    big = str(2 ** 200)
    text = render_csv([{'l': '0', 'N': big}], ['l', 'N', 'N°'], ["n=3"])
    assert text == f"# n=3\nl,N,N°\n0,{big},\n"
    assert render_json({'b': 1, 'a': "N°"}) == '{\n  "a": "N°",\n  "b": 1\n}\n'


def test_logging_to_file():
    with tempfile.TemporaryDirectory() as tmp:
        log_file = setup_logging(tmp)
        assert log_file == get_log_file(tmp)
        logging.getLogger("braid_lab.test").info("census started")
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.flush()
            handler.close()
            root.removeHandler(handler)
        with open(log_file, encoding="utf-8") as f:
            assert "census started" in f.read()
    assert setup_logging(None) is None


if __name__ == "__main__":
    print("Testing braid_lab...\n")
    results = {}
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                results[name] = True
            except AssertionError:
                results[name] = False

    print("\n=== Results ===")
    for name, success in results.items():
        status = "✓" if success else "✗"
        print(f"{status} {name}")
