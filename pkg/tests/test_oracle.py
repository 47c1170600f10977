import numpy as np
import pytest

from algdomain.oracle import cell_tolerance, grid_mask, grid_reeb, sampled_diffgeo_scan
from algdomain.polynomials import Box, Poly2
from algdomain.reeb import path_graph, poincare_reeb, vdigraph_isomorphic
from conftest import scene_annulus, scene_unit_disk

x, y = Poly2.x(), Poly2.y()


def test_unit_disk_mask():
    gm = grid_mask(scene_unit_disk(), 512)
    assert not gm.touches_border
    assert gm.area() == pytest.approx(np.pi, rel=5e-3)
    assert gm.hole_count() == 0


def test_annulus_mask():
    gm = grid_mask(scene_annulus(), 512)
    assert gm.area() == pytest.approx(np.pi * 0.75, rel=1e-2)
    assert gm.hole_count() == 1


def test_resolution_floor():
    with pytest.raises(ValueError):
        grid_mask(scene_unit_disk(), 32)


def test_grid_reeb_unit_disk():
    g = grid_reeb(scene_unit_disk(), "X", 512)
    tol = cell_tolerance(scene_unit_disk(), 512)
    assert vdigraph_isomorphic(g, path_graph(-1, 1), "exact_height", tol=tol)


def test_grid_reeb_annulus(annulus):
    g = grid_reeb(annulus.scene, "X", 512)
    assert g.betti1() == 1 and len(g.suppressed().vertices) == 4
    tol = cell_tolerance(annulus.scene, 512)
    assert vdigraph_isomorphic(g, poincare_reeb(annulus, "X"), "height_order", tol=tol)
    assert vdigraph_isomorphic(grid_reeb(annulus.scene, "Y", 512), poincare_reeb(annulus, "Y"), "height_order",
                               tol=tol)


def test_resolution_stability(cubic_circle):
    sc = cubic_circle.scene
    for axis in ("X", "Y"):
        a = grid_reeb(sc, axis, 512)
        b = grid_reeb(sc, axis, 1024)
        assert vdigraph_isomorphic(a, b, "height_order", tol=cell_tolerance(sc, 512))


def test_scan_cubic():
    r = sampled_diffgeo_scan(y - x ** 3, Box(-1, 1, -1, 1))
    assert r["inflection_count"] == 1


def test_scan_ellipse():
    r = sampled_diffgeo_scan(x * x / 4 + y * y - 1, Box(-3, 3, -3, 3))
    assert r == {"inflection_count": 0, "cv_count": 4, "bitangent_count": 0}


def test_scan_quartic():
    r = sampled_diffgeo_scan(y - x ** 4 + 2 * x * x, Box(-2, 2, -2, 2))
    assert r["bitangent_count"] == 1
    assert r["inflection_count"] == 2


def test_scan_circle():
    assert sampled_diffgeo_scan(x * x + y * y - 1, Box(-2, 2, -2, 2)) == {
        "inflection_count": 0, "cv_count": 0, "bitangent_count": 0}
