import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torireform.chaos import SectionPoint
from torireform.cli import main
from torireform.emit import (emit_csv, emit_svg_scatter, read_report_csv, render_svg_scatter)
from torireform.sweep import (RunConfig, SectionSet, SweepReport, SweepRow, detect_thresholds,
                              job_rng, run_sweep, splitmix64)
from torireform.symplectic import IntegrationBlowup
from torireform.system import DomainError

SMALL = dict(horizon=200.0, n_periods=20, initial_conditions=[[0.0, 0.5], [1.5, 3.0]])


def rows(*fractions):
    return [SweepRow(float(i), f, 0.0) for i, f in enumerate(fractions)]


def test_thresholds_with_hysteresis():
    assert detect_thresholds(rows(0.0, 0.8, 0.4, 0.1)) == (1.0, 3.0)
    assert detect_thresholds(rows(0.0, 0.6, 0.3)) == (1.0, None)
    assert detect_thresholds(rows(0.5, 0.2)) == (None, None)


def test_integrable_grid_has_no_onset():
    report = run_sweep(RunConfig(epsilon_grid=[0.0], **SMALL))
    assert len(report.rows) == 1
    assert report.rows[0].fraction_chaotic == 0.0
    assert report.eps_onset is None and report.eps_reform is None


def test_report_rows_follow_grid():
    cfg = RunConfig(epsilon_grid=[0.5, 10.0], **SMALL)
    report = run_sweep(cfg)
    assert [r.epsilon for r in report.rows] == cfg.epsilon_grid
    assert len(report.jobs) == 4


def test_sweep_independent_of_worker_count():
    a = run_sweep(RunConfig(epsilon_grid=[10.0], workers=1, jitter=1e-3, **SMALL))
    b = run_sweep(RunConfig(epsilon_grid=[10.0], workers=3, jitter=1e-3, **SMALL))
    assert a == b


def test_blowup_becomes_uncertain(monkeypatch):
    import torireform.sweep as sweep

    def boom(*args, **kwargs):
        raise IntegrationBlowup(12.5)

    monkeypatch.setattr(sweep, "lyapunov_max", boom)
    report = run_sweep(RunConfig(epsilon_grid=[10.0], **SMALL))
    assert all(j.label.value == "Uncertain" and "12.5" in j.diagnostic for j in report.jobs)
    assert report.rows[0].fraction_chaotic == 0.0


def test_job_rng_is_deterministic_and_distinct():
    assert job_rng(5, 3).random() == job_rng(5, 3).random()
    assert job_rng(5, 3).random() != job_rng(5, 4).random()
    assert splitmix64(0) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("bad", [
    dict(epsilon_grid=[]), dict(epsilon_grid=[10.0, 1.0]), dict(epsilon_grid=[-1.0]),
    dict(momentum_scaling="cube"), dict(n_periods=0), dict(omega=0.0),
])
def test_config_validation(bad):
    with pytest.raises(DomainError):
        RunConfig(**bad)


def test_config_rejects_unknown_keys():
    with pytest.raises(DomainError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})


def test_config_round_trip():
    cfg = RunConfig(epsilon_grid=[1.0, 2.0], stepper={"dt": 5e-4, "order": "Order4Yoshida"})
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


floats = st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)


@given(data=st.lists(st.tuples(floats, st.floats(0, 1), floats), max_size=8))
def test_report_csv_round_trip_is_bit_exact(tmp_path_factory, data):
    report = SweepReport(rows=[SweepRow(*r) for r in data])
    path = tmp_path_factory.mktemp("rt") / "report.csv"
    emit_csv(report, path)
    assert read_report_csv(path).rows == report.rows


def test_empty_section_set_is_header_only(tmp_path):
    path = tmp_path / "s.csv"
    emit_csv(SectionSet(10.0, [], []), path)
    assert path.read_bytes() == b"orbit,period,t,q,p,u\r\n"


def test_svg_marker_at_canvas_centre():
    svg = render_svg_scatter([SectionPoint(math.pi, 0.0)], bounds=(0, 2 * math.pi, -1, 1))
    assert '<circle cx="400.00" cy="300.00"' in svg
    assert "<!-- points: 1 clipped: 0 -->" in svg


def test_svg_clips_and_counts():
    pts = np.array([[math.pi, 0.0], [1.0, 5.0]])
    svg = render_svg_scatter(pts, bounds=(0, 2 * math.pi, -1, 1))
    assert svg.count("<circle") == 1
    assert "clipped: 1" in svg


def test_svg_is_well_formed(tmp_path):
    pts = [SectionPoint(u, math.sin(u)) for u in np.linspace(0, 6, 50)]
    path = tmp_path / "x.svg"
    emit_svg_scatter(pts, path, title="a < b & c")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg") and root.get("width") == "800"


def test_svg_empty_needs_opt_in():
    with pytest.raises(ValueError):
        render_svg_scatter([])
    ET.fromstring(render_svg_scatter([], allow_empty=True).split("\n", 1)[1])


def write_config(tmp_path, **extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**SMALL, "epsilon_grid": [0.5, 10.0], **extra}))
    return path


def test_sweep_cli_outputs_and_manifest(tmp_path, out_dir, capsys):
    cfg = write_config(tmp_path)
    assert main(["sweep", "--config", str(cfg), "--output-dir", str(out_dir)]) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == sorted(["report.csv", "jobs.csv", "manifest.json", "section_eps0.5.csv",
                            "section_eps0.5.svg", "section_eps10.csv", "section_eps10.svg"])
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["files"] == names
    assert manifest["seed"] == 0
    assert manifest["config"]["epsilon_grid"] == [0.5, 10.0]
    assert manifest["resolved_initial_conditions"]["10"][1] == [1.5, 3.0 * math.sqrt(10.0)]
    assert "eps_onset" in capsys.readouterr().out


def test_sweep_cli_is_byte_deterministic(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, jitter=1e-4, seed=11)
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["sweep", "--config", str(cfg), "--output-dir", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outputs[0] == outputs[1]


def test_flag_overrides_config(tmp_path, out_dir):
    cfg = write_config(tmp_path)
    assert main(["poincare", "--config", str(cfg), "--epsilon-grid", "3", "--dt", "5e-4",
                 "--order", "Order4Yoshida", "--output-dir", str(out_dir)]) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["epsilon_grid"] == [3.0]
    assert manifest["config"]["stepper"] == {"dt": 5e-4, "order": "Order4Yoshida"}


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TORIREFORM_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = write_config(tmp_path, epsilon_grid=[10.0])
    assert main(["duality-check", "--config", str(cfg), "--duality-t-end", "5"]) == 0
    assert (tmp_path / "env" / "duality.csv").exists()


def test_duality_check_cli(tmp_path, out_dir, capsys):
    cfg = write_config(tmp_path, epsilon_grid=[10.0], duality_t_end=10.0)
    assert main(["duality-check", "--config", str(cfg), "--lambda", "4", "--output-dir", str(out_dir)]) == 0
    assert "max_deviation=" in capsys.readouterr().out
    assert main(["duality-check", "--config", str(cfg), "--lambda", "4", "--duality-tolerance", "0",
                 "--output-dir", str(out_dir)]) == 1


def test_missing_config_exits_2_with_path(capsys):
    assert main(["sweep", "--config", "/nonexistent/cfg.json"]) == 2
    assert "/nonexistent/cfg.json" in capsys.readouterr().err


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path, epsilon_grid=[10.0], duality_t_end=1.0)
    assert main(["duality-check", "--config", str(cfg), "--output-dir", str(blocker / "sub")]) == 2


def test_domain_errors_exit_1(tmp_path, out_dir, capsys):
    cfg = write_config(tmp_path, epsilon_grid=[10.0, 1.0])
    assert main(["sweep", "--config", str(cfg), "--output-dir", str(out_dir)]) == 1
    assert "sorted" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sweep", "--config", str(bad)]) == 1


@pytest.mark.parametrize("argv", [["bogus"], ["sweep", "--frobnicate", "1"], []])
def test_usage_errors_exit_64(argv, capsys):
    assert main(argv) == 64
    assert "usage" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert main(["lindstedt-check", "--help"]) == 0
    assert "--lindstedt-lambdas" in capsys.readouterr().out
