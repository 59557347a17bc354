"""Dense brute-force oracles used to pin the spectral implementations.

Everything here is written against explicit matrices (numpy.linalg on
O(N) x O(N) systems), never against the library's FFT paths, so a test
that compares the two is an honest independent check.  The differentiation
matrices are the classical periodic ones: the cotangent first-derivative
matrix (identical to the FFT derivative with a zeroed Nyquist mode) and
the trigonometric second-derivative matrix (which keeps the Nyquist k^2).
Sizes are kept small (<= 32x32 grids) because the dense operators are
(2 n^2)^2.
"""

import numpy as np


def dense_d1(n, length):
    """Periodic spectral first-derivative matrix on n points over [0, length)."""
    if n % 2:
        raise ValueError("even n only")
    h = 2.0 * np.pi / n
    m = np.arange(n)
    diff = m[:, None] - m[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 0.5 * (-1.0) ** diff / np.tan(diff * h / 2.0)
    np.fill_diagonal(d, 0.0)
    return d * (2.0 * np.pi / length)


def dense_d2(n, length):
    """Periodic spectral second-derivative matrix on n points over [0, length)."""
    if n % 2:
        raise ValueError("even n only")
    h = 2.0 * np.pi / n
    m = np.arange(n)
    diff = m[:, None] - m[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = -((-1.0) ** diff) / (2.0 * np.sin(diff * h / 2.0) ** 2)
    np.fill_diagonal(d, -np.pi**2 / (3.0 * h**2) - 1.0 / 6.0)
    return d * (2.0 * np.pi / length) ** 2


def dense_dx(grid):
    """d/dx1 on C-order raveled (nx, ny) values."""
    return np.kron(dense_d1(grid.nx, grid.lx), np.eye(grid.ny))


def dense_dy(grid):
    """d/dx2 on C-order raveled (nx, ny) values."""
    return np.kron(np.eye(grid.nx), dense_d1(grid.ny, grid.ly))


def dense_laplacian(grid):
    return np.kron(dense_d2(grid.nx, grid.lx), np.eye(grid.ny)) + np.kron(
        np.eye(grid.nx), dense_d2(grid.ny, grid.ly)
    )


def dense_helmholtz_matrix(grid, a0=1.0, a1=1.0):
    n = grid.nx * grid.ny
    return a0 * np.eye(n) - a1 * dense_laplacian(grid)


def dense_el_displacement(theta1, theta2, degree, grid, a0=1.0, a1=1.0, weight=None):
    """Brute-force Euler-Lagrange solve for the closed-form displacement.

    Solves (a0 - a1*Lap) u_i = forcing_i with dense matrices; the forcing is
    w*(theta2 - theta1)*grad(theta2) for 0-forms and
    w*theta2*grad(theta1 - theta2) for 2-forms.  No prefactor: callers
    compare up to the library's documented global constant.
    Returns (u1, u2) as (nx, ny) arrays.
    """
    t1, t2 = theta1.ravel(), theta2.ravel()
    w = np.ones_like(t1) if weight is None else weight.ravel()
    dx, dy = dense_dx(grid), dense_dy(grid)
    if degree == 0:
        f1 = w * (t2 - t1) * (dx @ t2)
        f2 = w * (t2 - t1) * (dy @ t2)
    elif degree == 2:
        f1 = w * t2 * (dx @ (t1 - t2))
        f2 = w * t2 * (dy @ (t1 - t2))
    else:
        raise ValueError("closed form exists for degrees 0 and 2 only")
    a = dense_helmholtz_matrix(grid, a0, a1)
    u1 = np.linalg.solve(a, f1)
    u2 = np.linalg.solve(a, f2)
    return u1.reshape(grid.shape), u2.reshape(grid.shape)


def dense_lie_matrix(theta, grid):
    """The Lie-derivative operator u -> L_u theta as a dense matrix.

    theta is a (degree, components) pair with components as (nx, ny)
    arrays.  The matrix maps the stacked vector (u1, u2) of length 2n to
    the stacked residual components (length n for degrees 0 and 2, 2n for
    degree 1).
    """
    degree, comps = theta
    n = grid.nx * grid.ny
    dx, dy = dense_dx(grid), dense_dy(grid)
    if degree == 0:
        f = comps[0].ravel()
        return np.hstack([np.diag(dx @ f), np.diag(dy @ f)])
    if degree == 2:
        f = comps[0].ravel()
        return np.hstack([dx @ np.diag(f), dy @ np.diag(f)])
    a1v, a2v = comps[0].ravel(), comps[1].ravel()
    d = (dx, dy)
    comp_list = (a1v, a2v)
    blocks = []
    for i in range(2):
        row = []
        for j in range(2):
            block = np.diag(d[j] @ comp_list[i]) + np.diag(comp_list[j]) @ d[i]
            row.append(block)
        blocks.append(row)
    return np.block(blocks)


def dense_gof_solve(theta, theta_t, grid, a0=1.0, a1=1.0, weight=None):
    """Dense normal-equation solve of the generalized optical flow.

    Minimizes |W^(1/2) (theta_t + L u)|^2 + a0|u|^2 + a1|grad u|^2 over the
    grid, i.e. solves (L^T W L + a0 I - a1 Lap) u = -L^T W theta_t.
    theta and theta_t are (degree, components) pairs of (nx, ny) arrays.
    Returns (u1, u2) as (nx, ny) arrays.
    """
    n = grid.nx * grid.ny
    lmat = dense_lie_matrix(theta, grid)
    tt = np.concatenate([c.ravel() for c in theta_t[1]])
    wdiag = np.ones(lmat.shape[0])
    if weight is not None:
        w = weight.ravel()
        wdiag = np.concatenate([w] * (lmat.shape[0] // n))
    lap = dense_laplacian(grid)
    a = (
        lmat.T @ (wdiag[:, None] * lmat)
        + a0 * np.eye(2 * n)
        - a1 * np.block([[lap, np.zeros((n, n))], [np.zeros((n, n)), lap]])
    )
    b = -lmat.T @ (wdiag * tt)
    sol = np.linalg.solve(a, b)
    return sol[:n].reshape(grid.shape), sol[n:].reshape(grid.shape)


def explicit_covariance_gain(z, y, r_diag):
    """Kalman gain from the fully assembled joint covariance.

    z is the n x Ne state matrix, y the d x Ne predicted-observation
    matrix (raw values, means removed here).  Builds the complete
    (n+d) x (n+d) sample covariance and slices it, the formulation the
    observation-space code path must reproduce.
    """
    ne = z.shape[1]
    nz = z.shape[0]
    a = np.vstack([z - z.mean(axis=1, keepdims=True), y - y.mean(axis=1, keepdims=True)])
    p = a @ a.T / (ne - 1)
    p_zy = p[:nz, nz:]
    p_yy = p[nz:, nz:]
    return p_zy @ np.linalg.inv(p_yy + np.diag(r_diag))


def shear_map_x(eps, a, da):
    """AnalyticMap for (x, y) -> (x + eps*a(y), y), exactly invertible.

    a and da are callables of y.  This is the map x -> x + eps*u with
    u = (a(y), 0), the displacement used in the first-order consistency
    tests.
    """
    from liemorph import AnalyticMap

    def fwd(x, y):
        return x + eps * a(y), y

    def inv(x, y):
        return x - eps * a(y), y

    def jac(x, y):
        one = np.ones_like(np.asarray(x, dtype=float))
        zero = np.zeros_like(one)
        return ((one, -eps * da(y)), (zero, one))

    return AnalyticMap(fwd, inv, jac)


def compressive_map_x(eps, a, da):
    """AnalyticMap for (x, y) -> (x + eps*a(x), y), inverted by Newton.

    The Jacobian determinant 1/(1 + eps*da(x)) is not 1, so degree-2
    pushforwards exercise the density factor.  Requires eps*|da| < 1.
    """
    from liemorph import AnalyticMap

    def fwd(x, y):
        return x + eps * a(x), y

    def solve_back(xq):
        x = np.asarray(xq, dtype=float).copy()
        for _ in range(60):
            resid = x + eps * a(x) - xq
            x -= resid / (1.0 + eps * da(x))
            if np.max(np.abs(resid)) < 1e-15:
                break
        return x

    def inv(x, y):
        return solve_back(x), np.asarray(y, dtype=float)

    def jac(x, y):
        xs = solve_back(x)
        one = np.ones_like(xs)
        zero = np.zeros_like(xs)
        return ((1.0 / (1.0 + eps * da(xs)), zero), (zero, one))

    return AnalyticMap(fwd, inv, jac)


def random_band_limited(grid, seed, modes=3, amplitude=1.0, offset=0.0):
    """Random smooth periodic field: a few low Fourier modes, fixed seed."""
    rng = np.random.default_rng(seed)
    x, y = grid.xy()
    vals = np.full(grid.shape, float(offset))
    for _ in range(modes):
        kx = rng.integers(-3, 4)
        ky = rng.integers(-3, 4)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = amplitude * rng.uniform(0.3, 1.0)
        vals += amp * np.cos(
            2.0 * np.pi * (kx * x / grid.lx + ky * y / grid.ly) + phase
        )
    return vals
