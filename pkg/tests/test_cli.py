import json
from fractions import Fraction
from pathlib import Path

import pytest

from wkl import cli
from wkl.cli import (EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, EXIT_UNSTABLE, GOLDEN, ConfigError,
                     emit, golden_reports, main, parse_csv, run, validate)
from wkl.scattering import RankResult

GOLDEN_DIR = Path(__file__).parent / "golden"

A2 = {"type": "A2", "lattice": "sc", "Q": [1, 1]}
C2 = {"type": "C2", "lattice": "sc", "Q": [2, 1]}
G2 = {"type": "G2", "Q": [1, 3]}


def job(covering, **extra):
    return validate({"covering": dict(covering), **extra})


def write(tmp_path, config, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(config))
    return str(p)


# -- example rows ------------------------------------------------------------

def test_dims_row_for_double_cover_of_sl3():
    rep = run("dims", job({**A2, "n": 2}, character={"exceptional_on": [1, 2]}))
    assert rep.headers[:5] == ["n", "Gamma+", "S={a1}", "S={a2}", "Gamma-"]
    assert rep.rows[0][1:5] == [2, 1, 1, 0]
    assert rep.rows[0][5] is True
    assert rep.exit_code == EXIT_OK


def test_sigma_x_row_for_triple_cover_of_sp4():
    rep = run("sigma-x", job({**C2, "n": 3}))
    assert rep.rows == [[3, 9, 3, 3, 1, 1, 3, 3, 1]]


def test_dims_row_for_linear_g2():
    rep = run("dims", job({**G2, "n": 1}))
    assert rep.rows[0][1:5] == [1, 0, 0, 0]
    assert rep.rows[0][-1] == "theorem-backed"


def test_non_persistent_rows_are_marked():
    rep = run("dims", job({"type": "A1", "Q": [1], "n": 2}))
    assert rep.rows[0][-1] == "conjecture"


def test_sweep_default_filters_by_saturation():
    assert cli.n_sweep(job(A2, n_values="default")) == [1, 2, 4, 5, 7]
    assert cli.n_sweep(job(C2, n_values="default")) == [1, 5, 7]
    assert cli.n_sweep(job({**C2, "n": 3})) == [3]


def test_odd_degree_forces_trivial_xi():
    assert cli.make_covering({**A2, "n": 3, "xi": -1}).xi == 1
    assert cli.make_covering({**A2, "n": 2, "xi": -1}).xi == -1


def test_character_from_explicit_values():
    config = job({"type": "A1", "Q": [1], "n": 2},
                 character={"values": [{"q_exp": "3/2", "phase": "1/4"}]})
    rep = run("dims", config)
    # a regular character: one constituent, the whole principal series, of dimension |X|
    assert rep.headers[1:2] == ["Gamma+"]
    assert rep.rows[0][1:] == [1, True, "conjecture"]
    rep = run("dims", job({"type": "A1", "Q": [1], "n": 4},
                          character={"values": [{"q_exp": "1/3"}]}))
    assert rep.rows[0][1:] == [2, True, "theorem-backed"]


# -- formatting ---------------------------------------------------------------

def test_character_table_markdown_layout():
    text = emit(run("chartable", job(A2)), "md")
    lines = text.strip().splitlines()
    assert lines[0] == "|  | id | w1 | w2 | w1w2 | w2w1 | w_G |"
    assert len(lines) == 2 + 3
    assert lines[4] == "| sigma0 | 2 | 0 | 0 | -1 | -1 | 0 |"
    for line in lines[2:]:
        assert line.count("|") == 8


def test_orbits_of_linear_group_is_one_row():
    rep = run("orbits", job({**A2, "n": 1}))
    assert len(rep.rows) == 1
    assert rep.rows[0][:3] == [[0, 0], 1, 6]
    assert rep.meta["moduli_size"] == 1


def test_orbits_double_cover():
    rep = run("orbits", job({**A2, "n": 2}))
    assert [r[1] for r in rep.rows] == [3, 1]
    assert rep.rows[1][-1] == "1,1"


def test_cells_report():
    rep = run("cells", job(C2))
    reps = sorted(r[2] for r in rep.rows)
    assert reps == sorted(["1", "eps", "chi' + sigma0", "chi'' + sigma0"])


@pytest.mark.parametrize("command, covering", [
    ("dims", {**A2, "n": 2}), ("sigma-x", {**C2, "n": 3}), ("orbits", {**G2, "n": 2}),
    ("chartable", C2), ("cells", A2)])
def test_csv_round_trip(command, covering):
    rep = run(command, job(covering))
    headers, rows = parse_csv(emit(rep, "csv"))
    assert headers == rep.headers
    assert rows == [[cli._cell(v) for v in r] for r in rep.rows]


def test_json_output_uses_strings_for_rationals_and_flags():
    rep = run("dims", job({**A2, "n": 2}))
    data = json.loads(emit(rep, "json"))
    assert list(data) == ["command", "meta", "headers", "rows"]
    assert data["rows"][0][5] == "true"
    assert cli._plain(Fraction(3, 4)) == "3/4"


def test_unknown_format():
    with pytest.raises(ValueError):
        emit(run("chartable", job(A2)), "xml")


def test_output_is_deterministic():
    config = job({**C2, "n": 3})
    a = emit(run("scatter-rank", config, {"mode": "numeric"}), "json")
    b = emit(run("scatter-rank", config, {"mode": "numeric"}), "json")
    assert a == b


# -- golden tables -----------------------------------------------------------

def test_golden_files_match_regenerated_output():
    reports = golden_reports()
    assert set(reports) == set(GOLDEN)
    for name, rep in reports.items():
        for fmt in ("md", "json"):
            assert (GOLDEN_DIR / f"{name}.{fmt}").read_text() == emit(rep, fmt), name


def test_tables_command_writes_golden_files(tmp_path, capsys):
    assert main(["tables", "--golden", "--out", str(tmp_path)]) == EXIT_OK
    written = sorted(p.name for p in tmp_path.iterdir())
    assert written == sorted(p.name for p in GOLDEN_DIR.iterdir())
    for p in tmp_path.iterdir():
        assert p.read_text() == (GOLDEN_DIR / p.name).read_text()


def test_tables_needs_golden_flag(capsys):
    assert main(["tables"]) == EXIT_CONFIG


# -- scattering and verify ------------------------------------------------------

def test_scatter_rank_agrees_on_sp4():
    rep = run("scatter-rank", job({**C2, "n": 3}))
    assert rep.exit_code == EXIT_OK
    assert all(r[-1] is True for r in rep.rows)
    assert {r[4] for r in rep.rows} == {"exact"}


def test_scatter_rank_numeric_mode():
    rep = run("scatter-rank", job({**A2, "n": 2}, scattering={"mode": "numeric", "seeds": 3}))
    assert rep.exit_code == EXIT_OK
    assert rep.meta["seeds"] == 3 and rep.meta["q"] == 9.0
    assert {r[4] for r in rep.rows} == {"stable"}


def test_command_line_options_override_config():
    config = job({**A2, "n": 2}, scattering={"mode": "exact"})
    rep = run("scatter-rank", config, {"mode": "numeric", "q": 25.0, "seeds": 1})
    assert (rep.meta["mode"], rep.meta["q"], rep.meta["seeds"]) == ("numeric", 25.0, 1)


@pytest.mark.parametrize("covering", [{**A2, "n": 2}, {**C2, "n": 3}, {**G2, "n": 2}])
def test_verify_passes(covering):
    rep = run("verify", job(covering))
    assert rep.exit_code == EXIT_OK
    assert all(r[1] for r in rep.rows), rep.rows
    assert len(rep.rows) == 8


def test_verify_partial_character_skips_full_delta_checks():
    rep = run("verify", job({**A2, "n": 2}, character={"exceptional_on": [1]}))
    assert rep.exit_code == EXIT_OK
    assert len(rep.rows) == 6


def test_mismatch_exit_code(monkeypatch):
    monkeypatch.setattr(cli, "coarse_dim", lambda chi, S: -1)
    assert run("dims", job({**A2, "n": 2})).exit_code == EXIT_MISMATCH


def test_unstable_exit_code(monkeypatch):
    monkeypatch.setattr(cli, "constituent_rank", lambda *a, **k: RankResult(0, "unstable", (0, 1, 0)))
    assert run("scatter-rank", job({**A2, "n": 2}, scattering={"mode": "numeric"})).exit_code == EXIT_UNSTABLE


def test_wrong_rank_exit_code(monkeypatch):
    monkeypatch.setattr(cli, "constituent_rank", lambda *a, **k: RankResult(7, "exact", (7,)))
    assert run("scatter-rank", job({**A2, "n": 2})).exit_code == EXIT_MISMATCH


# -- configuration errors ---------------------------------------------------------

@pytest.mark.parametrize("config", [
    {"covering": {"type": "A2", "Q": [1, 1]}, "colour": "red"},
    {"covering": {"type": "A2", "Q": [1, 1], "n": 0}},
    {"covering": {"type": "A2", "Q": [1, 1], "xi": 2}},
    {"covering": {"Q": [1, 1]}},
    {"covering": {"type": "A2"}, "character": {"values": [{"q_exp": "x"}]}},
    {"covering": {"type": "A2"}, "scattering": {"q": 1}},
])
def test_schema_errors(config):
    with pytest.raises(ConfigError):
        validate(config)


def test_infeasible_covering_and_character():
    with pytest.raises(ConfigError):
        run("dims", job({"type": "A2", "Q": [1, 2], "n": 2}))
    with pytest.raises(ConfigError):
        run("dims", job({**A2, "n": 2}, character={"exceptional_on": [3]}))
    with pytest.raises(ConfigError):
        run("dims", {"n_values": [2]})
    with pytest.raises(ConfigError):
        run("tables", job(A2))


def test_main_writes_output(tmp_path):
    path = write(tmp_path, {"covering": {**A2, "n": 2}})
    out = tmp_path / "dims.md"
    assert main(["dims", "--config", path, "--format", "md", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[2].startswith("| 2 | 2 | 1 | 1 | 0 |")


def test_main_prints_to_stdout(tmp_path, capsys):
    path = write(tmp_path, {"covering": {**C2, "n": 3}})
    assert main(["sigma-x", "--config", path, "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1] == "3,9,3,3,1,1,3,3,1"


def test_main_config_errors(tmp_path, capsys):
    assert main(["dims"]) == EXIT_CONFIG
    assert main(["dims", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["dims", "--config", str(bad)]) == EXIT_CONFIG
    path = write(tmp_path, {"covering": {**A2, "n": 2}, "extra": 1})
    assert main(["dims", "--config", path]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_main_scatter_rank_flags(tmp_path, capsys):
    path = write(tmp_path, {"covering": {**A2, "n": 2}})
    code = main(["scatter-rank", "--config", path, "--mode", "numeric", "--seeds", "3", "--q", "49",
                 "--xi", "-1"])
    assert code == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["meta"]["xi"] == -1
    assert (data["meta"]["mode"], data["meta"]["q"], data["meta"]["seeds"]) == ("numeric", "49.0", 3)
