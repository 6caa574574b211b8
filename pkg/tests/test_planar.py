import numpy as np
import pytest

from gridshell import svg
from gridshell.services import surfaces
from gridshell.services.layout import assemble, init_grid
from gridshell.services.planar import (
    GAUGE,
    PlanarizeConfig,
    fab_penalty,
    init_planar,
    length_constraints,
    notch_objective,
    planar_model,
    planarize,
)
from gridshell.services.surface import prepare


def directional_check(function, x, direction, h=1e-6):
    """Central difference along `direction` against the analytic gradient."""
    _, grad = function(x)
    plus, _ = function(x + h * direction)
    minus, _ = function(x - h * direction)
    return (plus - minus) / (2 * h), grad @ direction


@pytest.fixture
def layout(disk_grid):
    return init_planar(disk_grid)


def test_initial_layout(layout, disk_grid):
    assert layout.ids == [x.id for x in disk_grid.members]
    assert layout.residuals.max() < 1e-8
    assert np.allclose(layout.x[list(GAUGE)], 0.0)
    assert len(layout.notches) == 9
    for notch in layout.notches:
        assert 0 < notch.lam_g < 1
        assert 0 < notch.lam_h < 1
    # 2 pairs per family
    assert len(layout.pairs) == 4


def test_circle_start(disk_grid):
    layout = init_planar(disk_grid, init="circle")
    assert layout.residuals.max() < 1e-8
    with pytest.raises(ValueError):
        init_planar(disk_grid, init="spiral")


def test_notch_gradient(layout):
    rng = np.random.default_rng(1)
    x = layout.x + rng.normal(0, 0.05, layout.x.shape)
    direction = rng.normal(size=x.shape)
    numeric, analytic = directional_check(
        lambda z: notch_objective(layout, z), x, direction
    )
    assert numeric == pytest.approx(analytic, rel=1e-5, abs=1e-9)


def test_length_jacobian(layout):
    rng = np.random.default_rng(2)
    x = layout.x + rng.normal(0, 0.05, layout.x.shape)
    direction = rng.normal(size=x.shape)
    h = 1e-6
    c, jacobian = length_constraints(layout, x)
    plus, _ = length_constraints(layout, x + h * direction)
    minus, _ = length_constraints(layout, x - h * direction)
    assert np.allclose(
        (plus - minus) / (2 * h), jacobian @ direction, rtol=1e-5, atol=1e-8
    )


def test_smooth_fab_gradient(layout):
    rng = np.random.default_rng(3)
    x = layout.x + rng.normal(0, 0.05, layout.x.shape)
    direction = rng.normal(size=x.shape)
    numeric, analytic = directional_check(
        lambda z: fab_penalty(layout, width=0.2, x=z, beta=20.0),
        x,
        direction,
    )
    assert numeric == pytest.approx(analytic, rel=1e-4, abs=1e-8)


def test_no_overlap_without_width(layout):
    value, grad = fab_penalty(layout, width=0.0)
    assert value == 0.0
    assert not grad.any()


def test_flat_grid_lays_out_exactly(disk_grid):
    pg = planarize(disk_grid, PlanarizeConfig())
    assert pg.converged
    assert pg.residuals.max() < 1e-6
    edge = np.mean([x.length for x in disk_grid.members])
    assert pg.notch_lengths.max() < 0.05 * edge
    assert notch_objective(pg)[0] <= pg.diagnostics["initial_notch"] + 1e-12


def test_dome_layout_shortens_notches(dome_grid):
    pg = planarize(dome_grid, PlanarizeConfig())
    assert pg.converged
    assert pg.diagnostics["notch"] <= pg.diagnostics["initial_notch"]
    model = planar_model(pg)
    assert model.residual < 1e-6
    assert len(model.notches) == 4
    for lamella in model.members:
        assert lamella.planar_length == pytest.approx(lamella.length, rel=1e-6)


def test_fabrication_width(dome_grid):
    pg = planarize(dome_grid, PlanarizeConfig(mu=0.1, width=0.01))
    assert pg.converged
    assert pg.width == 0.01
    assert pg.mu >= 0.1


def test_svg_export(tmp_path, dome_grid):
    pg = planarize(dome_grid, PlanarizeConfig(width=0.01))
    path = svg.render_svg(pg, tmp_path / "layout.svg")
    text = path.read_text()
    assert "viewBox" in text
    assert text.count("<path") == len(pg.ids)
    for id in pg.ids:
        assert f'id="{id}"' in text
    # one slot per notch on each of its two members
    assert svg.lamella_path(pg, 0, 0.02).count("M") == 1 + sum(
        1 for x in pg.notches if 0 in (x.g, x.h)
    )


def test_cap_layout_clears_lamellae():
    cap = prepare(surfaces.build("cap", 8))
    grid = assemble(cap, init_grid(cap.dual, 4, 4))
    width = 0.05 * np.mean([x.length for x in grid.members])
    pg = planarize(grid, PlanarizeConfig(mu=1.0, width=width))
    assert pg.converged
    assert pg.mu > 0
    assert pg.width == pytest.approx(width)
    # every gated overlap determinant is cleared after the solve
    overlap, _ = fab_penalty(pg)
    assert overlap <= 1e-9
    assert pg.diagnostics["fab"] <= 1e-9
