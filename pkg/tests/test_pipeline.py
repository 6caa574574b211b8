import csv
import json
from pathlib import Path

import pytest

from gridshell.services.config import Config
from gridshell.services.errors import StageError
from gridshell.services.layout import init_grid
from gridshell.services.optimizer import optimize
from gridshell.services.pipeline import (
    ARTIFACTS,
    geodesic_deviation,
    open_surface,
    run_pipeline,
    sweep_rotation,
    validate_grid,
    write_sweep,
)


@pytest.fixture
def config(tmp_path):
    return Config(
        MESH="builtin:dome",
        RESOLUTION=6,
        N=2,
        M=2,
        POPULATION=4,
        GENERATIONS=2,
        SEED_ROTATIONS=4,
        SWEEP_STEPS=4,
        OUTPUT_DIR=str(tmp_path / "run"),
        ATLAS_CACHE=False,
    )


@pytest.fixture
def finished(config):
    report = run_pipeline(config)
    return config, report


def test_run_writes_artifacts(finished):
    config, report = finished
    out = config.OUTPUT_DIR
    for key, name in ARTIFACTS.items():
        if key == "sweep":
            continue
        assert (Path(out) / name).is_file()
    assert report.members == 4
    assert report.mesh.boundary_vertices == 36
    assert report.segments == 0
    assert report.notches.count == 4
    assert report.planar_residual < 1e-6
    assert report.energies.e_grid == pytest.approx(
        report.energies.e_effort - report.lam * report.energies.e_shape
    )
    assert "OUTPUT_DIR" not in report.config


def test_report_files(finished):
    config, report = finished
    out = Path(config.OUTPUT_DIR)
    saved = json.loads((out / ARTIFACTS["report"]).read_text())
    assert saved["schema_version"] == 1
    assert saved["combinatorics"] == report.combinatorics
    timings = json.loads((out / ARTIFACTS["timings"]).read_text())
    assert set(timings["stages"]) == {
        "load",
        "distances",
        "layout",
        "optimize",
        "planarize",
        "validate",
    }
    with (out / ARTIFACTS["history"]).open() as f:
        rows = list(csv.DictReader(f))
    assert [int(x["generation"]) for x in rows] == [0, 1, 2]
    obj = (out / ARTIFACTS["members"]).read_text()
    assert obj.count("\no ") == 4


def test_validate_finished_run(finished):
    config, _ = finished
    report = validate_grid(config.OUTPUT_DIR)
    assert report.ok, report.violations
    assert set(report.deviations) == {"g0", "g1", "h0", "h1"}
    assert 0 <= report.eps_geo <= 12


def test_validate_detects_tampering(finished):
    config, _ = finished
    path = Path(config.OUTPUT_DIR)
    grid = json.loads((path / ARTIFACTS["grid"]).read_text())
    grid["members"][0]["length"] *= 1.1
    (path / ARTIFACTS["grid"]).write_text(json.dumps(grid))
    report = validate_grid(path)
    assert not report.ok
    assert any(x.startswith("recorded g0 length") for x in report.violations)


def test_stage_errors_name_the_stage(config):
    config = config.override(mesh="builtin:torus")
    with pytest.raises(StageError) as info:
        run_pipeline(config)
    assert info.value.stage == "load"
    assert info.value.exit_code == 4


def test_geodesic_deviation(dome, dome_grid):
    eps_geo, deviations = geodesic_deviation(dome, dome_grid)
    assert len(deviations) == 4
    assert 0 <= eps_geo <= 12


def test_sweep(tmp_path, config, dome):
    rows = sweep_rotation(config, surface=dome)
    assert len(rows) == 4
    assert [x.rotation for x in rows] == pytest.approx([0, 0.25, 0.5, 0.75])
    assert all(x.feasible for x in rows)
    assert not rows[0].changed
    path = write_sweep(rows, tmp_path / "sweep.csv")
    with path.open() as f:
        header = next(csv.reader(f))
    assert header[:3] == ["rotation", "feasible", "e_effort"]


def test_runs_are_reproducible(tmp_path, config):
    again = config.override(output_dir=str(tmp_path / "again"))
    run_pipeline(config)
    run_pipeline(again)
    first, second = Path(config.OUTPUT_DIR), Path(again.OUTPUT_DIR)
    # the config copy names its own directory, timings are wall-clock
    for key, name in ARTIFACTS.items():
        if key in ("config", "timings", "sweep"):
            continue
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_optimizer_beats_rotation_sweep(tmp_path):
    config = Config(
        MESH="builtin:hills",
        RESOLUTION=8,
        N=2,
        M=2,
        LAMBDA=1.0,
        POPULATION=4,
        GENERATIONS=2,
        SEED_ROTATIONS=8,
        SWEEP_STEPS=8,
        OUTPUT_DIR=str(tmp_path / "run"),
        ATLAS_CACHE=False,
    )
    surface = open_surface(config)
    grid0 = init_grid(surface.dual, config.N, config.M, config.ROTATION)
    result = optimize(surface, grid0, config.ga, config.LAMBDA)
    rows = sweep_rotation(config, surface=surface)
    sweep = min(x.e_grid for x in rows if x.feasible)
    assert result.best.fitness <= sweep + 1e-12
    assert result.report.e_grid == pytest.approx(result.best.fitness)
