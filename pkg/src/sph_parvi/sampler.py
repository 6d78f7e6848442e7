"""Run loop: initialization, step control, integrators, and reporting.

A run evolves M particles for T iterations under SPH forces coupled to the
target, tracing average density and kinetic energy. The densest recorded
state (max average density) is reported as best_positions; the final state
is reported separately because the cloud keeps breathing around equilibrium.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import forces
from .errors import ConfigurationError, NumericsError
from .kernels import KernelKind, KernelSpec, make_kernel
from .state import FluidParams, ForceVariant, ParticleSystem, PressureVariant, SamplingMode
from .targets import TargetModel

__all__ = [
    "Integrator",
    "DensityMode",
    "HSchedule",
    "InitSpec",
    "RunConfig",
    "RunReport",
    "initialize",
    "cfl_step",
    "leapfrog_step",
    "semi_implicit_step",
    "run",
]

# External-force magnitudes below this do not constrain the CFL step.
CFL_FORCE_FLOOR = 1e-12


class Integrator(str, enum.Enum):
    LEAPFROG = "leapfrog"
    SEMI_IMPLICIT = "semi_implicit"


class DensityMode(str, enum.Enum):
    SUMMATION = "summation"
    CONTINUITY = "continuity"


@dataclass(frozen=True)
class HSchedule:
    """Smoothing-length schedule over the T iterations.

    constant:   h(t) = start
    linear:     start -> end along a straight line
    reciprocal: h(t) = start / (1 + (start/end - 1) t/(T-1)), hitting both
                endpoints exactly
    """

    kind: str = "constant"
    start: float = 0.3
    end: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "reciprocal"):
            raise ConfigurationError(f"unknown h schedule {self.kind!r}")
        if not (math.isfinite(self.start) and self.start > 0):
            raise ConfigurationError(f"h schedule start must be positive, got {self.start}")
        if self.kind == "constant":
            if self.end is not None and self.end != self.start:
                raise ConfigurationError("constant h schedule takes no distinct end value")
            object.__setattr__(self, "end", self.start)
        else:
            if self.end is None or not (math.isfinite(self.end) and self.end > 0):
                raise ConfigurationError(f"h schedule end must be positive, got {self.end}")

    def h_at(self, t: int, T: int) -> float:
        if self.kind == "constant" or T <= 1:
            return self.start
        frac = t / (T - 1)
        if self.kind == "linear":
            return self.start + (self.end - self.start) * frac
        return self.start / (1.0 + (self.start / self.end - 1.0) * frac)


@dataclass(frozen=True)
class InitSpec:
    """Initial particle proposal: a uniform box or a diagonal Gaussian.

    symmetrize mirrors half the draws about the proposal center (antithetic
    sampling), which zeroes the initial center-of-mass offset; internal
    forces conserve momentum, so for even M this pins the cloud's mean mode.
    """

    kind: str
    low: np.ndarray | None = None
    high: np.ndarray | None = None
    mean: np.ndarray | None = None
    sd: np.ndarray | None = None
    symmetrize: bool = False

    @staticmethod
    def uniform(low, high, symmetrize: bool = False) -> "InitSpec":
        low = np.atleast_1d(np.asarray(low, dtype=float))
        high = np.atleast_1d(np.asarray(high, dtype=float))
        if low.shape != high.shape or np.any(high <= low):
            raise ConfigurationError("uniform init needs low < high componentwise")
        return InitSpec(kind="uniform", low=low, high=high, symmetrize=symmetrize)

    @staticmethod
    def gaussian(mean, sd, symmetrize: bool = False) -> "InitSpec":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        sd = np.atleast_1d(np.asarray(sd, dtype=float))
        if mean.shape != sd.shape or np.any(sd <= 0):
            raise ConfigurationError("gaussian init needs positive sd of the same shape as mean")
        return InitSpec(kind="gaussian", mean=mean, sd=sd, symmetrize=symmetrize)

    @property
    def dim(self) -> int:
        ref = self.low if self.kind == "uniform" else self.mean
        return int(ref.shape[0])

    @property
    def center(self) -> np.ndarray:
        if self.kind == "uniform":
            return 0.5 * (self.low + self.high)
        return self.mean

    def sample(self, rng: np.random.Generator, M: int) -> np.ndarray:
        if self.kind == "uniform":
            draws = rng.uniform(self.low, self.high, size=(M, self.dim))
        else:
            draws = rng.normal(self.mean, self.sd, size=(M, self.dim))
        if self.symmetrize:
            half = (M + 1) // 2
            mirrored = 2.0 * self.center[None, :] - draws[:half]
            draws = np.concatenate([draws[:half], mirrored])[:M]
        return draws


@dataclass(frozen=True)
class RunConfig:
    mode: SamplingMode
    M: int
    d: int
    T: int
    h_schedule: HSchedule
    init: InitSpec
    target: TargetModel
    fluid: FluidParams = field(default_factory=FluidParams)
    dt: float | str = "auto"
    integrator: Integrator = Integrator.SEMI_IMPLICIT
    density_mode: DensityMode = DensityMode.SUMMATION
    kernel: KernelKind = KernelKind.CUBIC_SPLINE
    viscosity_kernel: KernelKind | None = None
    pressure_variant: PressureVariant = PressureVariant.NEG_LOG
    force_variant: ForceVariant = ForceVariant.SCORE
    seed: int = 0
    snapshot_stride: int | None = None
    particle_mass: float | None = None
    echo: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", SamplingMode(self.mode))
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        object.__setattr__(self, "density_mode", DensityMode(self.density_mode))
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel))
        if self.viscosity_kernel is not None:
            object.__setattr__(self, "viscosity_kernel", KernelKind.parse(self.viscosity_kernel))
        object.__setattr__(self, "pressure_variant", PressureVariant(self.pressure_variant))
        object.__setattr__(self, "force_variant", ForceVariant(self.force_variant))
        if self.M < 1:
            raise ConfigurationError(f"M must be >= 1, got {self.M}")
        if self.T < 1:
            raise ConfigurationError(f"T must be >= 1, got {self.T}")
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"d must be 1, 2, or 3, got {self.d}")
        if self.target.dim != self.d:
            raise ConfigurationError(f"target dim {self.target.dim} does not match d={self.d}")
        if self.init.dim != self.d:
            raise ConfigurationError(f"init dim {self.init.dim} does not match d={self.d}")
        if self.dt != "auto":
            # dt = 0 is allowed: it freezes the state so a run degenerates to the identity
            if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt >= 0):
                raise ConfigurationError(f"dt must be non-negative or 'auto', got {self.dt!r}")
            object.__setattr__(self, "dt", float(self.dt))
        if self.snapshot_stride is None:
            object.__setattr__(self, "snapshot_stride", max(1, self.T // 10))
        elif not (isinstance(self.snapshot_stride, int) and self.snapshot_stride >= 1):
            raise ConfigurationError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride!r}")
        if self.particle_mass is not None and not (
            isinstance(self.particle_mass, (int, float)) and math.isfinite(self.particle_mass) and self.particle_mass > 0
        ):
            raise ConfigurationError(f"particle_mass must be positive, got {self.particle_mass!r}")


@dataclass
class RunReport:
    status: str
    final_positions: np.ndarray
    final_velocities: np.ndarray
    final_densities: np.ndarray
    best_positions: np.ndarray
    best_iteration: int
    avg_density_trace: np.ndarray
    kinetic_energy_trace: np.ndarray
    snapshots: list[tuple[int, np.ndarray]]
    wall_time: dict
    config_echo: dict
    failed_iteration: int | None = None
    failure_message: str | None = None


def initialize(config: RunConfig, rng: np.random.Generator | None = None) -> ParticleSystem:
    """Draw positions from the proposal; zero velocities; equal masses.

    Densities are filled by kernel summation with the run's kernel at h(0).
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    positions = config.init.sample(rng, config.M)
    mass = config.particle_mass if config.particle_mass is not None else 1.0 / config.M
    ps = ParticleSystem(
        positions=positions,
        velocities=np.zeros((config.M, config.d)),
        densities=np.ones(config.M),
        masses=np.full(config.M, mass),
    )
    spec = make_kernel(config.kernel, config.d, config.h_schedule.h_at(0, config.T))
    return ps.with_state(densities=forces.summation_density(ps, None, config.fluid, spec=spec))


def cfl_step(params: FluidParams, ext_magnitudes: np.ndarray, h: float) -> float:
    """dt = min(0.25 h / |f_ext|_min, 0.4 h / (c0 (1 + 0.6 visc_alpha))).

    External-force magnitudes at or below 1e-12 are ignored; with none
    left, only the sound-speed bound applies.
    """
    bound = 0.4 * h / (params.c0 * (1.0 + 0.6 * params.visc_alpha))
    mags = np.asarray(ext_magnitudes, dtype=float)
    mags = mags[mags > CFL_FORCE_FLOOR]
    if mags.size:
        bound = min(bound, 0.25 * h / float(mags.min()))
    return bound


def _first_nonfinite(arr: np.ndarray) -> int | None:
    bad = ~np.isfinite(arr)
    if not bad.any():
        return None
    flat_index = int(np.argmax(bad.any(axis=tuple(range(1, arr.ndim))))) if arr.ndim > 1 else int(np.argmax(bad))
    return flat_index


def _checked(arr: np.ndarray, what: str) -> np.ndarray:
    i = _first_nonfinite(arr)
    if i is not None:
        raise NumericsError(f"non-finite {what} for particle {i}", particle=i)
    return arr


def semi_implicit_step(ps: ParticleSystem, accel_fn, dt: float, *, density_fn=None) -> ParticleSystem:
    """Symplectic Euler: kick with a(t), then drift with the new velocity."""
    a = _checked(accel_fn(ps), "acceleration")
    v_new = _checked(ps.velocities + dt * a, "velocity")
    r_new = _checked(ps.positions + dt * v_new, "position")
    out = ps.with_state(positions=r_new, velocities=v_new)
    if density_fn is not None:
        out = out.with_state(densities=_checked(density_fn(out), "density"))
    return out


def leapfrog_step(ps: ParticleSystem, accel_fn, dt: float, *, density_fn=None) -> ParticleSystem:
    """Kick-drift-kick leapfrog.

    density_fn, when given, refreshes densities at the drifted positions
    before the closing kick so the second acceleration sees them.
    """
    a0 = _checked(accel_fn(ps), "acceleration")
    v_half = ps.velocities + 0.5 * dt * a0
    r_new = _checked(ps.positions + dt * v_half, "position")
    mid = ps.with_state(positions=r_new, velocities=v_half)
    if density_fn is not None:
        mid = mid.with_state(densities=_checked(density_fn(mid), "density"))
    a1 = _checked(accel_fn(mid), "acceleration")
    v_new = _checked(v_half + 0.5 * dt * a1, "velocity")
    return mid.with_state(velocities=v_new)


class _Evaluator:
    """Per-run force evaluator with a single-slot pairwise-cache memo.

    The memo is keyed on the positions array identity and the current h, so
    repeated acceleration/density calls within one iteration (and across the
    iteration boundary under a constant schedule) reuse one O(M^2) build.
    Holding a reference to the keyed array keeps id() collisions impossible.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.fluid
        self.spec: KernelSpec | None = None
        self.vis_spec: KernelSpec | None = None
        self._slot = None

    def set_h(self, h: float):
        if self.spec is not None and self.spec.h == h:
            return
        self.spec = make_kernel(self.config.kernel, self.config.d, h)
        if self.config.viscosity_kernel is not None:
            self.vis_spec = make_kernel(self.config.viscosity_kernel, self.config.d, h)

    def cache(self, ps: ParticleSystem):
        slot = self._slot
        if slot is not None and slot[0] is ps.positions and slot[1] == self.spec.h:
            return slot[2]
        cache = forces.build_cache(ps, self.spec)
        self._slot = (ps.positions, self.spec.h, cache)
        return cache

    def accel(self, ps: ParticleSystem) -> np.ndarray:
        return forces.total_acceleration(
            ps,
            self.cache(ps),
            self.config.target,
            self.params,
            self.config.mode,
            pressure_variant=self.config.pressure_variant,
            force_variant=self.config.force_variant,
            laplacian_spec=self.vis_spec,
        )

    def summation_density(self, ps: ParticleSystem) -> np.ndarray:
        return forces.summation_density(ps, self.cache(ps), self.params)

    def continuity_density(self, ps: ParticleSystem, dt: float, rho_prev: np.ndarray) -> np.ndarray:
        rate = forces.continuity_density_rate(ps, self.cache(ps), self.params)
        return np.maximum(rho_prev + dt * rate, self.params.rho_min)

    def external_magnitudes(self, ps: ParticleSystem) -> np.ndarray:
        if self.config.mode is SamplingMode.EXTERNAL_FORCE:
            ext = forces.external_force(self.config.target, ps.positions, self.params, self.config.force_variant)
        else:
            ext = np.zeros_like(ps.positions)
        if self.params.gravity is not None:
            ext = ext + np.asarray(self.params.gravity, dtype=float)
        return np.sqrt((ext * ext).sum(axis=1))


def run(config: RunConfig, trace_sink=None) -> RunReport:
    """Execute a full sampling run.

    trace_sink, when given, is called as trace_sink(iteration, avg_density,
    kinetic_energy) after each completed iteration (for streamed trace files).
    Returns a failed report instead of raising when the state degenerates.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    ps = initialize(config, rng)
    wall = {"initialize": time.perf_counter() - t0}

    ev = _Evaluator(config)
    avg_density: list[float] = []
    kinetic: list[float] = []
    snapshots: list[tuple[int, np.ndarray]] = []
    best_rho = -math.inf
    best_positions = ps.positions.copy()
    best_iteration = -1
    status, failed_iteration, failure_message = "ok", None, None

    t_loop = time.perf_counter()
    for t in range(config.T):
        ev.set_h(config.h_schedule.h_at(t, config.T))
        try:
            if config.density_mode is DensityMode.SUMMATION:
                ps = ps.with_state(densities=ev.summation_density(ps))
            avg_rho = float(ps.densities.mean())
            ke = float(0.5 * np.sum(ps.masses * np.einsum("ij,ij->i", ps.velocities, ps.velocities)))
            dt = config.dt if config.dt != "auto" else cfl_step(config.fluid, ev.external_magnitudes(ps), ev.spec.h)
            positions_t = ps.positions

            if config.integrator is Integrator.LEAPFROG:
                density_fn = ev.summation_density if config.density_mode is DensityMode.SUMMATION else None
                ps_next = leapfrog_step(ps, ev.accel, dt, density_fn=density_fn)
                if config.density_mode is DensityMode.CONTINUITY:
                    ps_next = ps_next.with_state(densities=_checked(ev.continuity_density(ps_next, dt, ps.densities), "density"))
            else:
                rho_next = None
                if config.density_mode is DensityMode.CONTINUITY:
                    rho_next = _checked(ev.continuity_density(ps, dt, ps.densities), "density")
                ps_next = semi_implicit_step(ps, ev.accel, dt)
                if rho_next is not None:
                    ps_next = ps_next.with_state(densities=rho_next)
        except NumericsError as exc:
            status = "failed"
            failed_iteration = t
            exc.iteration = t
            failure_message = f"iteration {t}: {exc}"
            break

        avg_density.append(avg_rho)
        kinetic.append(ke)
        if trace_sink is not None:
            trace_sink(t, avg_rho, ke)
        if t % config.snapshot_stride == 0:
            snapshots.append((t, positions_t.copy()))
        if avg_rho > best_rho:
            best_rho, best_positions, best_iteration = avg_rho, positions_t.copy(), t
        ps = ps_next
    wall["iterations"] = time.perf_counter() - t_loop
    wall["total"] = time.perf_counter() - t0

    return RunReport(
        status=status,
        final_positions=ps.positions.copy(),
        final_velocities=ps.velocities.copy(),
        final_densities=ps.densities.copy(),
        best_positions=best_positions,
        best_iteration=best_iteration,
        avg_density_trace=np.asarray(avg_density),
        kinetic_energy_trace=np.asarray(kinetic),
        snapshots=snapshots,
        wall_time=wall,
        config_echo=dict(config.echo) if config.echo else {},
        failed_iteration=failed_iteration,
        failure_message=failure_message,
    )
