import csv
import json

import pytest

from steklov.cli.main import build_parser, main, parse_config
from steklov.cli.suites import build_mesh
from steklov.shared.errors import EXIT_OK, EXIT_USAGE, UsageError
from steklov.shared.models import Command, MeshKind, OperatorLabel


def parse(*argv):
    return parse_config(build_parser().parse_args(list(argv)))


def test_defaults(tmp_path):
    config = parse("check-identities", "--output", str(tmp_path))
    assert config.command == Command.CHECK_IDENTITIES
    assert config.mesh.kind == MeshKind.SPHERE
    assert config.mesh.order == 12 and config.mesh.R == 1.0
    assert config.m == 1.0 and config.spectral_parameter == 0j
    assert config.M is None and config.couplings == []


def test_flags_override_the_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"m": 3.0, "mesh": {"order": 16}, "seed": 7}))
    config = parse("eig-step", "--config", str(path), "--order", "8", "--z", "0.5,0.25", "--M", "40")
    assert config.m == 3.0 and config.seed == 7
    assert config.mesh.order == 8
    assert config.spectral_parameter == 0.5 + 0.25j
    assert config.M == 40.0


def test_coupling_lists_are_sorted():
    config = parse("rate-resolvent", "--M", "80,10,40,20")
    assert config.M is None
    assert config.couplings == [10.0, 20.0, 40.0, 80.0]


def test_negative_coupling_is_a_usage_error():
    with pytest.raises(UsageError) as info:
        parse("eig-step", "--M=-5")
    assert info.value.detail.startswith("M")
    assert info.value.exit_code == EXIT_USAGE


@pytest.mark.parametrize("payload, field", [
    ({"M": -5}, "M"),
    ({"foo": 1}, "foo"),
    ({"mesh": {"order": 7}}, "mesh.order"),
    ({"interval": [2.0, 1.0]}, "interval"),
])
def test_invalid_config_names_the_field(tmp_path, capsys, payload, field):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    code = main(["check-identities", "--config", str(path), "--output", str(tmp_path)])
    assert code == EXIT_USAGE
    assert f"check-identities failed: {field}" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert main(["parametrix", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert "config" in capsys.readouterr().err


def test_chart_mesh_needs_a_power_of_two(tmp_path):
    config = parse("assemble", "--mesh", "chart-graph", "--order", "12", "--output", str(tmp_path))
    with pytest.raises(UsageError):
        build_mesh(config)


def test_ps_compare_needs_a_sphere(tmp_path, capsys):
    code = main(["ps-compare", "--mesh", "chart-graph", "--order", "8", "--output", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "ps-compare failed" in capsys.readouterr().err


def test_parametrix_run_writes_tables_and_summary(tmp_path, capsys):
    code = main(["parametrix", "--m", "10", "--z", "0.3,0", "--order", "8", "--output", str(tmp_path)])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("PASS transport_a0") for line in lines)
    assert not any(line.startswith("FAIL") for line in lines)
    with (tmp_path / "parametrix.csv").open(newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["name", "value", "tolerance", "passed"]
    assert {row[0] for row in rows[1:]} >= {"transport_a0", "boundary_a1", "b10_flat_chart", "halfspace_symbol"}
    assert all(row[3] == "1" for row in rows[1:])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["command"] == "parametrix"
    assert summary["config"]["m"] == 10.0
    assert summary["values"]["ellipticity_constant"] > 0


def test_csv_cells_keep_full_precision(tmp_path):
    main(["parametrix", "--order", "8", "--output", str(tmp_path)])
    text = (tmp_path / "parametrix.csv").read_text()
    assert "\r" not in text
    summary = json.loads((tmp_path / "summary.json").read_text())
    flat = next(c for c in summary["checks"] if c["name"] == "b10_flat_chart")
    assert f"b10_flat_chart,{format(flat['value'], '.17g')}," in text


def test_assemble_dumps_the_operator(tmp_path):
    code = main(["assemble", "--order", "8", "--label", "lambda", "--z", "0.2,0", "--output", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / f"{OperatorLabel.LAMBDA.value}.sdop").stat().st_size > 0
    assert (tmp_path / "assemble.csv").exists()


@pytest.mark.slow
def test_check_identities_passes_on_the_default_sphere(tmp_path):
    assert main(["check-identities", "--z", "0.4,0", "--output", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(check["passed"] for check in summary["checks"])


@pytest.mark.slow
def test_eig_mit_matches_the_oracle(tmp_path):
    code = main(["eig-mit", "--order", "12", "--window", "1.0,2.5", "--steps", "48", "--output", str(tmp_path)])
    assert code == EXIT_OK
    with (tmp_path / "eigen.csv").open(newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["M", "lambda", "residual"]
    assert rows[1][0] == "inf"


@pytest.mark.slow
def test_rate_resolvent_checks_the_decay_slopes(tmp_path):
    main(["rate-resolvent", "--order", "8", "--M", "10,20,40,80", "--z", "0.5,0", "--output", str(tmp_path)])
    with (tmp_path / "decay.csv").open(newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["M", "ps_exterior_h1", "exterior_resolvent", "exterior_trace", "extension", "extension_h_half"]
    assert len(rows) == 5
    summary = json.loads((tmp_path / "summary.json").read_text())
    names = {check["name"] for check in summary["checks"]}
    assert {f"{name}_slope" for name in rows[0][1:]} <= names
