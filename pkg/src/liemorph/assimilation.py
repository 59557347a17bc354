"""Twin-experiment data assimilation: observations, ensembles, EnKF.

Observations are the truth's h and vorticity spectrally projected to a
coarse grid, taken error-free but assigned the prescribed variances
r = 0.01 * mean(obs^2).  The analysis is a stochastic perturbed-observation
EnKF computed on the coarse grid with the gain formed from ensemble
cross-covariances in observation space (the full state covariance is never
assembled); increments are refined spectrally back to the fine grid.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .morph_engine import ObservablePair, run_morph
from .forms import DiffForm
from .spectral_core import GridSpec, ScalarField, coarsen, refine
from .tsw_model import InstabilityError, TSWState, double_vortex_ic, integrate, vorticity_of

__all__ = [
    "ObsSet",
    "Ensemble",
    "observe",
    "generate_ensemble",
    "draw_center_offsets",
    "kalman_gain",
    "enkf_analysis",
    "morphed_enkf",
]


@dataclass
class ObsSet:
    """Coarse-grid observations of h and omega with their variances."""

    grid: GridSpec
    h_obs: ScalarField
    omega_obs: ScalarField
    r_h: float
    r_omega: float

    def __post_init__(self):
        if self.h_obs.grid != self.grid or self.omega_obs.grid != self.grid:
            raise ValueError("observation fields must live on the obs grid")
        if self.r_h < 0 or self.r_omega < 0:
            raise ValueError("observation variances must be nonnegative")


@dataclass
class Ensemble:
    """A list of TSWState members plus the seed that generated them."""

    members: list
    rng_seed: int

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("need at least 2 members for covariance estimation")
        grid = self.members[0].grid
        for m in self.members:
            if m.grid != grid:
                raise ValueError("members on mismatched grids")

    @property
    def grid(self):
        return self.members[0].grid

    def __len__(self):
        return len(self.members)


def observe(truth, coarse):
    """Coarsen the truth's h and omega; r = 0.01 * mean(obs^2) per field."""
    h_obs = coarsen(truth.h, coarse)
    omega_obs = coarsen(vorticity_of(truth), coarse)
    r_h = 0.01 * float(np.mean(h_obs.values**2))
    r_omega = 0.01 * float(np.mean(omega_obs.values**2))
    return ObsSet(coarse, h_obs, omega_obs, r_h, r_omega)


def draw_center_offsets(rng, ne, mean=0.1, std=0.1):
    """Per-member (ox, oy) draws from N(mean, std^2); shape (ne, 2)."""
    return rng.normal(mean, std, size=(ne, 2))


def generate_ensemble(
    base_ic,
    grid,
    ne,
    seed,
    spinup_steps,
    params,
    perturb_mean=0.1,
    perturb_std=0.1,
):
    """Spin up ne members from center-perturbed initial conditions.

    (ox, oy) are drawn from N(perturb_mean, perturb_std^2) with a seeded
    generator, so identical seeds give bit-identical ensembles.
    """
    if ne < 2:
        raise ValueError("need at least 2 members")
    rng = np.random.default_rng(seed)
    offsets = draw_center_offsets(rng, ne, perturb_mean, perturb_std)
    members = []
    for i, (ox, oy) in enumerate(offsets):
        ic = replace(base_ic, ox=float(ox), oy=float(oy))
        state = double_vortex_ic(ic, grid, params)
        try:
            state = integrate(state, spinup_steps, params)
        except InstabilityError as err:
            raise InstabilityError(f"member {i} spin-up failed: {err}") from err
        members.append(state)
    return Ensemble(members, rng_seed=seed)


def kalman_gain(z_anom, y_anom, r_diag):
    """K = C_zy (C_yy + R)^-1 from anomaly matrices.

    z_anom is n x Ne, y_anom is d x Ne (means already removed), r_diag the
    diagonal of R.  Covariances use the 1/(Ne-1) estimator; only the d x d
    observation-space matrix is ever formed.
    """
    ne = z_anom.shape[1]
    c_yy = y_anom @ y_anom.T / (ne - 1) + np.diag(r_diag)
    c_zy = z_anom @ y_anom.T / (ne - 1)
    return np.linalg.solve(c_yy.T, c_zy.T).T


def _member_obs_vector(state, coarse):
    # predicted observations, computed exactly as observe() does
    h = coarsen(state.h, coarse).values.ravel()
    w = coarsen(vorticity_of(state), coarse).values.ravel()
    return np.concatenate([h, w])


def _member_state_vector(state, coarse):
    return np.concatenate(
        [coarsen(f, coarse).values.ravel() for f in state.fields()]
    )


def enkf_analysis(ensemble, obs, obs_noise_seed):
    """Stochastic perturbed-observation EnKF analysis on the coarse grid.

    The coarse state vector stacks (h, Theta, v1, v2); the observation
    vector stacks (h, omega) diagnostics.  Analysis increments are refined
    spectrally to the fine grid and added to the members.
    """
    if obs.r_h <= 0 or obs.r_omega <= 0:
        raise ValueError(
            "observation variances must be positive (identically zero "
            "observations are rejected)"
        )
    coarse = obs.grid
    fine = ensemble.grid
    ne = len(ensemble)
    nc = coarse.nx * coarse.ny

    z = np.stack([_member_state_vector(m, coarse) for m in ensemble.members], axis=1)
    y = np.stack([_member_obs_vector(m, coarse) for m in ensemble.members], axis=1)
    z_anom = z - z.mean(axis=1, keepdims=True)
    y_anom = y - y.mean(axis=1, keepdims=True)

    r_diag = np.concatenate([np.full(nc, obs.r_h), np.full(nc, obs.r_omega)])
    gain = kalman_gain(z_anom, y_anom, r_diag)

    y_obs = np.concatenate([obs.h_obs.values.ravel(), obs.omega_obs.values.ravel()])
    rng = np.random.default_rng(obs_noise_seed)
    noise = rng.normal(0.0, 1.0, size=(2 * nc, ne)) * np.sqrt(r_diag)[:, None]
    innovations = y_obs[:, None] + noise - y
    dz = gain @ innovations

    new_members = []
    for i, member in enumerate(ensemble.members):
        fields = []
        for k, fld in enumerate(member.fields()):
            inc_coarse = ScalarField(coarse, dz[k * nc : (k + 1) * nc, i].reshape(coarse.shape))
            fields.append(fld + refine(inc_coarse, fine))
        try:
            new_members.append(TSWState(*fields, time=member.time))
        except InstabilityError as err:
            raise InstabilityError(f"analysis member {i}: {err}") from err
    return Ensemble(new_members, rng_seed=ensemble.rng_seed)


def _targets_from_obs(obs, fine):
    return [
        ObservablePair("h", DiffForm.from_scalar(2, refine(obs.h_obs, fine))),
        ObservablePair("omega", DiffForm.from_scalar(2, refine(obs.omega_obs, fine))),
    ]


def _morph_member(args):
    member, targets, morph_params, solver_params, naive, index = args
    try:
        return run_morph(member, targets, morph_params, solver_params, naive=naive)
    except InstabilityError as err:
        raise InstabilityError(f"morph of member {index}: {err}") from err


def morph_ensemble(
    ensemble, obs, morph_params, solver_params=None, naive=False, workers=1
):
    """Morph every member toward the observations (step 2-3 of the pipeline).

    Member morphs are independent; workers > 1 runs them in separate
    processes with identical results.  Returns the morphed ensemble and the
    per-member traces.
    """
    targets = _targets_from_obs(obs, ensemble.grid)
    jobs = [
        (m, targets, morph_params, solver_params, naive, i)
        for i, m in enumerate(ensemble.members)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_morph_member, jobs))
    else:
        results = [_morph_member(j) for j in jobs]
    morphed = Ensemble([st for st, _ in results], rng_seed=ensemble.rng_seed)
    traces = [tr for _, tr in results]
    return morphed, traces


def morphed_enkf(
    ensemble,
    obs,
    morph_params,
    obs_noise_seed,
    solver_params=None,
    naive=False,
    workers=1,
):
    """Morph every member toward the observations, then run the plain EnKF.

    Returns the analysis ensemble and the per-member morph traces.
    """
    morphed, traces = morph_ensemble(
        ensemble, obs, morph_params, solver_params, naive=naive, workers=workers
    )
    analysis = enkf_analysis(morphed, obs, obs_noise_seed)
    return analysis, traces
