"""Differential forms of degree 0, 1, 2 on the periodic grid.

Degree 0 is a function f, degree 1 is a1*dx1 + a2*dx2, degree 2 is a density
f*dx1^dx2.  The metric is flat, so the musical maps between 1-forms and
vector fields are the identity on components; `vector_to_oneform` and
`oneform_to_vector` keep that bookkeeping explicit.
"""

import numpy as np
from scipy.ndimage import map_coordinates

from .spectral_core import (
    ScalarField,
    _check_finite,
    _deriv,
    curl_2d,
    divergence,
    domain_integral,
    gradient,
)

__all__ = [
    "DiffForm",
    "DisplacementField",
    "AnalyticMap",
    "lie_derivative",
    "exterior_derivative",
    "hodge_star",
    "codifferential",
    "h1_norm",
    "pushforward",
    "vector_to_oneform",
    "oneform_to_vector",
    "rotation_map",
    "translation_map",
    "periodic_interpolate",
]

_COMPONENT_COUNT = {0: 1, 1: 2, 2: 1}


class DiffForm:
    """A degree-tagged differential form; components are ScalarFields."""

    def __init__(self, degree, components):
        if degree not in (0, 1, 2):
            raise ValueError(f"degree must be 0, 1 or 2, got {degree}")
        components = tuple(components)
        if len(components) != _COMPONENT_COUNT[degree]:
            raise ValueError(
                f"degree {degree} needs {_COMPONENT_COUNT[degree]} components, "
                f"got {len(components)}"
            )
        grid = components[0].grid
        for c in components:
            if c.grid != grid:
                raise ValueError("components on mismatched grids")
            _check_finite(c.values, "DiffForm component")
        self.degree = degree
        self.components = components
        self.grid = grid

    @classmethod
    def zero(cls, grid, degree):
        n = _COMPONENT_COUNT[degree]
        return cls(degree, tuple(ScalarField.zeros(grid) for _ in range(n)))

    @classmethod
    def from_scalar(cls, degree, f):
        """Wrap a ScalarField as a 0-form or a 2-form density."""
        if degree not in (0, 2):
            raise ValueError("from_scalar builds degree 0 or 2 only")
        return cls(degree, (f,))

    def __repr__(self):
        return f"DiffForm(degree={self.degree}, grid={self.grid!r})"


class DisplacementField:
    """A 2-component vector field u on the grid (length / virtual time)."""

    def __init__(self, u1, u2):
        if u1.grid != u2.grid:
            raise ValueError("components on mismatched grids")
        _check_finite(u1.values, "DisplacementField")
        _check_finite(u2.values, "DisplacementField")
        self.u1 = u1
        self.u2 = u2
        self.grid = u1.grid

    @classmethod
    def zeros(cls, grid):
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    @classmethod
    def from_functions(cls, grid, f1, f2):
        return cls(
            ScalarField.from_function(grid, f1), ScalarField.from_function(grid, f2)
        )

    def __add__(self, other):
        return DisplacementField(self.u1 + other.u1, self.u2 + other.u2)

    def __sub__(self, other):
        return DisplacementField(self.u1 - other.u1, self.u2 - other.u2)

    def __mul__(self, c):
        return DisplacementField(self.u1 * c, self.u2 * c)

    __rmul__ = __mul__

    def __neg__(self):
        return DisplacementField(-self.u1, -self.u2)

    def __repr__(self):
        return f"DisplacementField(grid={self.grid!r})"


def vector_to_oneform(u):
    """Musical flat: identity on components in the flat metric."""
    return DiffForm(1, (u.u1, u.u2))


def oneform_to_vector(alpha):
    """Musical sharp: identity on components in the flat metric."""
    if alpha.degree != 1:
        raise ValueError("oneform_to_vector needs a 1-form")
    return DisplacementField(alpha.components[0], alpha.components[1])


def lie_derivative(theta, u):
    """Lie derivative L_u theta, spectral derivatives throughout.

    Degree 0: u . grad f.  Degree 2: div(f u).  Degree 1 with
    alpha = a1*dx1 + a2*dx2:
        (L_u alpha)_i = u . grad a_i + a1 * du1/dx_i + a2 * du2/dx_i.
    """
    if theta.grid != u.grid:
        raise ValueError("form and displacement on mismatched grids")
    g = theta.grid
    u1, u2 = u.u1.values, u.u2.values
    if theta.degree == 0:
        f = theta.components[0].values
        out = u1 * _deriv(f, g, 0) + u2 * _deriv(f, g, 1)
        return DiffForm(0, (ScalarField(g, out),))
    if theta.degree == 2:
        f = theta.components[0].values
        out = _deriv(f * u1, g, 0) + _deriv(f * u2, g, 1)
        return DiffForm(2, (ScalarField(g, out),))
    a1, a2 = theta.components[0].values, theta.components[1].values
    u1x, u1y = _deriv(u1, g, 0), _deriv(u1, g, 1)
    u2x, u2y = _deriv(u2, g, 0), _deriv(u2, g, 1)
    b1 = u1 * _deriv(a1, g, 0) + u2 * _deriv(a1, g, 1) + a1 * u1x + a2 * u2x
    b2 = u1 * _deriv(a2, g, 0) + u2 * _deriv(a2, g, 1) + a1 * u1y + a2 * u2y
    return DiffForm(1, (ScalarField(g, b1), ScalarField(g, b2)))


def exterior_derivative(theta):
    """d: 0-form -> 1-form (gradient components); 1-form -> 2-form (curl)."""
    if theta.degree == 2:
        raise ValueError("d of a 2-form vanishes in 2D; use DiffForm.zero")
    if theta.degree == 0:
        fx, fy = gradient(theta.components[0])
        return DiffForm(1, (fx, fy))
    a1, a2 = theta.components
    density = curl_2d(DisplacementField(a1, a2))
    return DiffForm(2, (density,))


def hodge_star(theta):
    """Hodge star for n = 2: 0-form <-> 2-form, (a1, a2) -> (-a2, a1)."""
    if theta.degree == 0:
        return DiffForm(2, theta.components)
    if theta.degree == 2:
        return DiffForm(0, theta.components)
    a1, a2 = theta.components
    return DiffForm(1, (-a2, a1))


def codifferential(theta):
    """Codifferential delta = -*d* on this flat 2D domain.

    The global sign is pinned by the adjointness identity
    integral(<df, alpha>) = integral(<f, delta alpha>), which is what every
    caller relies on; delta maps a function to 0.
    """
    if theta.degree == 0:
        return DiffForm.zero(theta.grid, 0)
    star = hodge_star(theta)
    dstar = exterior_derivative(star)
    out = hodge_star(dstar)
    return DiffForm(out.degree, tuple(-c for c in out.components))


def form_inner_integral(alpha, beta):
    """Domain integral of the pointwise inner product of two same-degree forms."""
    if alpha.degree != beta.degree:
        raise ValueError("degree mismatch")
    acc = sum(
        a.values * b.values for a, b in zip(alpha.components, beta.components)
    )
    return domain_integral(ScalarField(alpha.grid, acc))


def h1_norm(u):
    """sqrt of integral(|u|^2 + curl(u)^2 + div(u)^2), mean-value quadrature."""
    w = curl_2d(u).values
    d = divergence(u).values
    dens = u.u1.values**2 + u.u2.values**2 + w**2 + d**2
    return float(np.sqrt(domain_integral(ScalarField(u.grid, dens))))


class AnalyticMap:
    """A closed-form diffeomorphism of the torus with its inverse.

    Args:
        forward: closure (x, y) -> (x', y').
        inverse: closure for the inverse map.
        jacobian_of_inverse: closure returning the 2x2 matrix entries
            m[i][j] = d(T^-1)_i / dx_j as arrays.
    """

    def __init__(self, forward, inverse, jacobian_of_inverse):
        self.forward = forward
        self.inverse = inverse
        self.jacobian_of_inverse = jacobian_of_inverse

    def check_inverse(self, grid, tol=1e-9):
        """Verify forward(inverse(x)) = x (mod periods) on the grid points."""
        x, y = grid.xy()
        xi, yi = self.inverse(x, y)
        xf, yf = self.forward(xi, yi)
        ex = np.abs((xf - x + grid.lx / 2) % grid.lx - grid.lx / 2)
        ey = np.abs((yf - y + grid.ly / 2) % grid.ly - grid.ly / 2)
        err = max(ex.max(), ey.max())
        scale = max(grid.lx, grid.ly)
        if err > tol * scale:
            raise ValueError(
                f"map inverse fails round-trip on the grid: err={err:.3e}"
            )


def rotation_map(angle, cx, cy):
    """Rotation by `angle` about (cx, cy)."""
    c, s = np.cos(angle), np.sin(angle)

    def fwd(x, y):
        dx, dy = x - cx, y - cy
        return cx + c * dx - s * dy, cy + s * dx + c * dy

    def inv(x, y):
        dx, dy = x - cx, y - cy
        return cx + c * dx + s * dy, cy - s * dx + c * dy

    def jac(x, y):
        one = np.ones_like(np.asarray(x, dtype=float))
        return ((c * one, s * one), (-s * one, c * one))

    return AnalyticMap(fwd, inv, jac)


def translation_map(tx, ty):
    def fwd(x, y):
        return x + tx, y + ty

    def inv(x, y):
        return x - tx, y - ty

    def jac(x, y):
        one = np.ones_like(np.asarray(x, dtype=float))
        zero = np.zeros_like(one)
        return ((one, zero), (zero, one))

    return AnalyticMap(fwd, inv, jac)


def periodic_interpolate(f, xq, yq):
    """Evaluate a ScalarField at off-grid points by periodic bicubic splines."""
    g = f.grid
    coords = np.stack([np.asarray(xq) / g.dx, np.asarray(yq) / g.dy])
    return map_coordinates(f.values, coords, order=3, mode="grid-wrap")


def pushforward(theta, amap, check=True):
    """Push theta forward under the map: the pull-back by its inverse.

    Degree 0: f(T^-1(x)).  Degree 2: f(T^-1(x)) * det J_{T^-1}(x).
    Degree 1: b_i(x) = sum_j a_j(T^-1(x)) * d(T^-1)_j/dx_i.
    Off-grid values come from periodic bicubic interpolation.
    """
    grid = theta.grid
    if check:
        amap.check_inverse(grid)
    x, y = grid.xy()
    xi, yi = amap.inverse(x, y)

    def at_src(comp):
        return periodic_interpolate(comp, xi, yi)

    if theta.degree == 0:
        return DiffForm(0, (ScalarField(grid, at_src(theta.components[0])),))
    if theta.degree == 2:
        m = amap.jacobian_of_inverse(x, y)
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        if np.any(det <= 0):
            raise ValueError("map must be orientation-preserving (det J > 0)")
        return DiffForm(2, (ScalarField(grid, at_src(theta.components[0]) * det),))
    m = amap.jacobian_of_inverse(x, y)
    a1, a2 = (at_src(c) for c in theta.components)
    b1 = a1 * m[0][0] + a2 * m[1][0]
    b2 = a1 * m[0][1] + a2 * m[1][1]
    return DiffForm(1, (ScalarField(grid, b1), ScalarField(grid, b2)))
