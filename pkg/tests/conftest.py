import sys

import pytest

from algdomain import Box, Poly2
from algdomain.domain import Scene, build_domain

x, y = Poly2.x(), Poly2.y()


def scene_unit_disk():
    return Scene([x * x + y * y - 1], Box(-2, 2, -2, 2), (0.0, 0.0))


def scene_annulus():
    return Scene([x * x + y * y - 1, x * x + y * y - 0.25], Box(-2, 2, -2, 2), (0.0, 0.7))


def scene_circle_parabola():
    return Scene([x * x + y * y - 1, y - x * x + 0.5], Box(-2, 2, -2, 2), (0.0, -0.2))


def scene_cubic_circle():
    return Scene([x * x + y * y - 4, y - x ** 3 + x], Box(-3, 3, -3, 3), (0.0, 1.0))


def scene_quartic_line():
    # the quartic is sheared by 0.3x so its bitangent contacts are not poles
    return Scene([y - x ** 4 + 2 * x * x - 0.3 * x, y - 1.5 - 0.3 * x], Box(-2.5, 2.5, -2.5, 2.5), (0.0, 0.5))


def scene_ellipse():
    return Scene([Poly2.ellipse(0, 0, 2, 1, 0.5)], Box(-3, 3, -3, 3), (0.0, 0.0))


def scene_stacked():
    return Scene([x * x + (y - 2) ** 2 - 1, x * x + (y + 2) ** 2 - 1, x * x / 9 + y * y / 16 - 1],
                 Box(-4, 4, -5, 5), (2.0, 0.0))


@pytest.fixture(scope="session")
def unit_disk():
    return build_domain(scene_unit_disk())


@pytest.fixture(scope="session")
def annulus():
    return build_domain(scene_annulus())


@pytest.fixture(scope="session")
def circle_parabola():
    return build_domain(scene_circle_parabola())


@pytest.fixture(scope="session")
def cubic_circle():
    return build_domain(scene_cubic_circle())


@pytest.fixture(scope="session")
def quartic_line():
    return build_domain(scene_quartic_line())


@pytest.fixture(scope="session")
def ellipse():
    return build_domain(scene_ellipse())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
