"""
Procedural test and example surfaces. Every surface comes with native UVs,
so nothing here goes through the conformal parameterization.
"""
import numpy as np

from gridshell.services.mesh import TriMesh, build_mesh

CAP_RADIUS = 1.5
HILL_CENTERS = ((0.45, 0.0), (-0.45, 0.0))
HILL_HEIGHT = 0.25
HILL_WIDTH = 0.3
# Center angle, half width and depth of the bay. The radial profile is
# gentle enough that scaling the polar rings never inverts a triangle.
MOON_BAY = (1.5 * np.pi, 1.2, 0.4)


def _polar_disk(rings: int, radius=lambda theta: np.ones_like(theta)):
    """Hexagonal polar disk: ring j holds 6j vertices at (j/rings)·R(θ)."""
    points = [np.zeros(2)]
    starts = [0]
    for j in range(1, rings + 1):
        theta = 2 * np.pi * np.arange(6 * j) / (6 * j)
        r = (j / rings) * radius(theta)
        starts.append(len(points))
        points.extend(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))

    faces = []
    for b in range(6):
        faces.append((0, 1 + b, 1 + (b + 1) % 6))
    for j in range(2, rings + 1):
        inner, outer = 6 * (j - 1), 6 * j
        first_in, first_out = starts[j - 1], starts[j]
        a = b = 0
        while a < inner or b < outer:
            if b < outer and (a == inner or (b + 1) * inner <= (a + 1) * outer):
                faces.append(
                    (
                        first_in + a % inner,
                        first_out + b,
                        first_out + (b + 1) % outer,
                    )
                )
                b += 1
            else:
                faces.append(
                    (
                        first_in + a % inner,
                        first_out + b % outer,
                        first_in + (a + 1) % inner,
                    )
                )
                a += 1
    return np.array(points), np.array(faces)


def _heightfield(rings, height, radius=None):
    kwargs = {"radius": radius} if radius else {}
    uv, faces = _polar_disk(rings, **kwargs)
    x, y = uv.T
    vertices = np.column_stack([x, y, height(x, y)])
    return vertices, faces, uv


def _rectangle(nu, nv, size=(1.0, 1.0)):
    u = np.linspace(0.0, size[0], nu + 1)
    v = np.linspace(0.0, size[1], nv + 1)
    uu, vv = np.meshgrid(u, v)
    uv = np.column_stack([uu.ravel(), vv.ravel()])
    faces = []
    for j in range(nv):
        for i in range(nu):
            a = j * (nu + 1) + i
            b, c, d = a + 1, a + nu + 1, a + nu + 2
            faces += [(a, b, d), (a, d, c)]
    return uv, np.array(faces)


def disk(rings):
    return _heightfield(rings, lambda x, y: np.zeros_like(x))


def dome(rings):
    return _heightfield(rings, lambda x, y: 0.3 * (1 - x * x - y * y))


def cap(rings):
    def height(x, y):
        r2 = x * x + y * y
        return np.sqrt(CAP_RADIUS**2 - r2) - np.sqrt(CAP_RADIUS**2 - 1)

    return _heightfield(rings, height)


def hills(rings):
    def height(x, y):
        z = np.zeros_like(x)
        for cx, cy in HILL_CENTERS:
            d2 = (x - cx) ** 2 + (y - cy) ** 2
            z += HILL_HEIGHT * np.exp(-d2 / (2 * HILL_WIDTH**2))
        return z

    return _heightfield(rings, height)


def drop(rings):
    def height(x, y):
        return 0.08 * np.cos(3 * np.pi * np.sqrt(x * x + y * y))

    return _heightfield(rings, height)


def moon(rings):
    """Flat disk with one bay cut into its lower side."""
    center, width, depth = MOON_BAY

    def radius(theta):
        offset = np.angle(np.exp(1j * (theta - center)))
        bump = np.where(
            np.abs(offset) < width,
            np.cos(0.5 * np.pi * offset / width) ** 2,
            0.0,
        )
        return 1 - depth * bump

    return _heightfield(rings, lambda x, y: np.zeros_like(x), radius)


def plane(resolution):
    uv, faces = _rectangle(resolution, resolution)
    return np.column_stack([uv, np.zeros(len(uv))]), faces, uv


def square(resolution=1):
    uv = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]])
    return np.column_stack([uv, np.zeros(4)]), faces, uv


def cylinder(resolution):
    """Radius 1 patch around the y axis, φ in [-π/3, π/3], height 1."""
    span = 2 * np.pi / 3
    uv, faces = _rectangle(2 * resolution, resolution, size=(span, 1.0))
    phi = uv[:, 0] - span / 2
    vertices = np.column_stack([np.sin(phi), uv[:, 1], np.cos(phi)])
    return vertices, faces, uv


def octant(resolution):
    """Unit sphere octant from a subdivided triangle, pole at (0, 0, 1)."""
    n = resolution
    corners = np.eye(3)
    plane_corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    index, points, uv = {}, [], []
    for j in range(n + 1):
        for i in range(n + 1 - j):
            weights = np.array([n - i - j, i, j]) / n
            index[i, j] = len(points)
            p = weights @ corners
            points.append(p / np.linalg.norm(p))
            uv.append(weights @ plane_corners)
    faces = []
    for j in range(n):
        for i in range(n - j):
            faces.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j + 1 < n:
                faces.append(
                    (index[i + 1, j], index[i + 1, j + 1], index[i, j + 1])
                )
    return np.array(points), np.array(faces), np.array(uv)


def torus(resolution):
    """Closed surface, no boundary."""
    n = max(resolution, 3)
    u, v = np.meshgrid(
        2 * np.pi * np.arange(2 * n) / (2 * n), 2 * np.pi * np.arange(n) / n
    )
    u, v = u.ravel(), v.ravel()
    vertices = np.column_stack(
        [
            (1 + 0.3 * np.cos(v)) * np.cos(u),
            (1 + 0.3 * np.cos(v)) * np.sin(u),
            0.3 * np.sin(v),
        ]
    )
    faces = []
    for j in range(n):
        for i in range(2 * n):
            a = j * 2 * n + i
            b = j * 2 * n + (i + 1) % (2 * n)
            c = ((j + 1) % n) * 2 * n + i
            d = ((j + 1) % n) * 2 * n + (i + 1) % (2 * n)
            faces += [(a, b, d), (a, d, c)]
    return vertices, np.array(faces), None


SURFACES = {
    f.__name__: f
    for f in (
        disk,
        dome,
        cap,
        hills,
        drop,
        moon,
        plane,
        square,
        cylinder,
        octant,
        torus,
    )
}


def arrays(name: str, resolution: int):
    if name not in SURFACES:
        raise KeyError(
            f"Unknown surface `{name}`. Choose from: {', '.join(SURFACES)}."
        )
    return SURFACES[name](resolution)


def build(name: str, resolution: int = 12) -> TriMesh:
    vertices, faces, uv = arrays(name, resolution)
    return build_mesh(vertices, faces, uv)
