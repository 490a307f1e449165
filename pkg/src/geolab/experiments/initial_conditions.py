"""Named initial-condition generators.

Every generator returns a state already in the admissible subspace of its
system: even/odd z-symmetry, barotropic constraint, zero box mean for SNS,
solenoidal barotropic velocity and q_e <= 0 for TAM.
"""

from collections.abc import Callable
from typing import Any

import numpy as np

from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger
from geolab.solvers.pe import PESolver, PEState, discontinuous_ic
from geolab.solvers.sns import SNSSolver, SNSState
from geolab.solvers.tam import TAMSolver, TAMState
from geolab.spectral.field import Axis, SpectralField, derivative, project_symmetry
from geolab.spectral.grid import Grid, Grid2, Grid3, SymmetryClass
from geolab.spectral.operators import barotropic_project

logger = get_logger(__name__)

AnySolver = SNSSolver | PESolver | TAMSolver
AnyState = SNSState | PEState | TAMState
Generator = Callable[[AnySolver, dict[str, Any]], AnyState]


def _param(params: dict[str, Any], key: str, default: float) -> float:
    try:
        return float(params.get(key, default))
    except (TypeError, ValueError) as e:
        msg = f"expected a number, got {params[key]!r}"
        raise ConfigError(msg, key=f"ic.{key}") from e


def _grid(solver: AnySolver) -> Grid:
    return solver.cfg.grid


def _zero_velocity(grid: Grid) -> tuple[SpectralField, SpectralField]:
    sym = SymmetryClass.EVEN if isinstance(grid, Grid3) else SymmetryClass.NONE
    return SpectralField.zeros(grid, sym), SpectralField.zeros(grid, sym)


def _start(solver: AnySolver, velocity: tuple[SpectralField, SpectralField], **extra: SpectralField) -> AnyState:
    if isinstance(solver, SNSSolver):
        return solver.initial_state(velocity)
    if isinstance(solver, PESolver):
        return solver.initial_state(velocity, extra.get("T") if solver.cfg.has_temperature else None)
    grid = solver.cfg.grid
    zeros = _zero_velocity(grid)
    return solver.initial_state(
        velocity,
        (extra.get("v1", zeros[0]), extra.get("v2", zeros[1])),
        extra.get("Te", SpectralField.zeros(grid)),
        extra.get("qe", SpectralField.constant(grid, -solver.cfg.qhat)),
    )


def zero(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """Rest state (TAM: q_e = 0, on the saturation boundary)."""
    grid = _grid(solver)
    if isinstance(solver, TAMSolver):
        return _start(solver, _zero_velocity(grid), qe=SpectralField.zeros(grid))
    return _start(solver, _zero_velocity(grid))


def _taylor_green(grid: Grid, amplitude: float) -> tuple[SpectralField, SpectralField]:
    """Solenoidal cellular flow with zero mean."""
    x, y = grid.coordinates()[:2]
    k1 = 2.0 * np.pi / grid.L1
    k2 = 2.0 * np.pi / grid.L2
    sym = SymmetryClass.EVEN if isinstance(grid, Grid3) else SymmetryClass.NONE
    v1 = amplitude * np.cos(k1 * x) * np.sin(k2 * y)
    v2 = -amplitude * (k1 / k2) * np.sin(k1 * x) * np.cos(k2 * y)
    return SpectralField.from_physical(grid, v1, sym), SpectralField.from_physical(grid, v2, sym)


def taylor_green(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """Barotropic Taylor-Green cells plus a divergent baroclinic mode cos(pi z/h)."""
    grid = _grid(solver)
    v1, v2 = _taylor_green(grid, _param(params, "amplitude", 1.0))
    if isinstance(grid, Grid3):
        baroclinic = _param(params, "baroclinic", 0.5)
        x, _, _ = grid.coordinates()
        z = grid.z_centered()
        mode = baroclinic * np.sin(2.0 * np.pi * x / grid.L1) * np.cos(np.pi * z / grid.half_height)
        v1 = v1 + SpectralField.from_physical(grid, mode, SymmetryClass.EVEN)
    return _start(solver, (v1, v2))


def stacked_cells(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """x-z cells in the first two vertical modes at one horizontal wavenumber.

    v1 = sin(k x) (a1 cos(pi z/h) + a2 cos(2 pi z/h)), v2 = 0, k = 2 pi mode / L1.
    The two cells interact only through the (2k, pi/h) and (2k, 3pi/h) modes,
    so the pressure source sits at horizontal/vertical wavenumber ratio 2k h/pi.
    """
    grid = _grid(solver)
    if not isinstance(grid, Grid3):
        msg = "stacked cells are defined for the sns and pe systems only"
        raise ConfigError(msg, key="ic.name")
    mode = int(_param(params, "mode", 1))
    if mode < 1:
        msg = f"mode={mode}"
        raise ConfigError(msg, key="ic.mode", constraint="mode >= 1")
    x, _, _ = grid.coordinates()
    zeta = np.pi * grid.z_centered() / grid.half_height
    a1 = _param(params, "a1", 1.0)
    a2 = _param(params, "a2", 1.0)
    v1 = np.sin(2.0 * np.pi * mode * x / grid.L1) * (a1 * np.cos(zeta) + a2 * np.cos(2.0 * zeta))
    v2 = SpectralField.zeros(grid, SymmetryClass.EVEN)
    return _start(solver, (SpectralField.from_physical(grid, v1, SymmetryClass.EVEN), v2))


def _random_field(grid: Grid, rng: np.random.Generator, max_mode: int, amplitude: float) -> SpectralField:
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    low = np.ones(grid.shape, dtype=bool)
    for m in grid.mode_numbers:
        low = low & (np.abs(m) <= max_mode)
    coeffs = np.where(low, coeffs, 0.0)
    coeffs.flat[0] = 0.0
    values = np.fft.ifftn(coeffs).real
    peak = float(np.abs(values).max())
    scale = amplitude / peak if peak > 0 else 0.0
    return SpectralField.from_physical(grid, scale * values)


def random_smooth(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """Seeded low-mode data projected onto the admissible subspace."""
    grid = _grid(solver)
    amplitude = _param(params, "amplitude", 0.5)
    max_mode = int(_param(params, "max_mode", 2))
    rng = np.random.default_rng(int(_param(params, "seed", 0)))
    fields = [_random_field(grid, rng, max_mode, amplitude) for _ in range(4)]
    if isinstance(grid, Grid3):
        v1, v2 = (project_symmetry(f, SymmetryClass.EVEN) for f in fields[:2])
        (v1, v2), _ = barotropic_project((v1, v2))
        T = project_symmetry(fields[2], SymmetryClass.ODD)
        return _start(solver, (v1, v2), T=T)
    deficit = _param(params, "moisture_deficit", 0.05)
    qe_values = fields[3].physical()
    qe = SpectralField.from_physical(grid, -deficit - (qe_values - qe_values.min()))
    return _start(solver, (fields[0], fields[1]), v1=fields[2], v2=fields[3], qe=qe)


def discontinuous(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """v0 = a |z|^delta + sigma 1{|z| < eta} for the temperature-free PE."""
    if not isinstance(solver, PESolver):
        msg = "the discontinuous initial condition is defined for the pe system only"
        raise ConfigError(msg, key="ic.name")
    if solver.cfg.has_temperature:
        msg = f"discontinuous data drive a temperature-free run, got variant {solver.cfg.variant.value}"
        raise ConfigError(msg, key="system.variant", constraint="variant = NOTEMP")
    return discontinuous_ic(
        (_param(params, "a1", 1.0), _param(params, "a2", 0.0)),
        _param(params, "delta", 0.5),
        _param(params, "eta", 0.5),
        (_param(params, "sigma1", 0.01), _param(params, "sigma2", 0.0)),
        solver.cfg,
    )


def _bump(grid: Grid2, x0: float, y0: float, kappa: float) -> np.ndarray:
    """Smooth periodic bump peaking at (x0, y0) with value 1."""
    x, y = grid.coordinates()
    return np.exp(
        kappa * (np.cos(2.0 * np.pi * (x - x0) / grid.L1) - 1.0)
        + kappa * (np.cos(2.0 * np.pi * (y - y0) / grid.L2) - 1.0)
    )


def vortical(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """TAM vortex, divergent baroclinic jet and sub-saturated moisture."""
    if not isinstance(solver, TAMSolver):
        msg = "the vortical initial condition is defined for the tam system only"
        raise ConfigError(msg, key="ic.name")
    grid = solver.cfg.grid
    amplitude = _param(params, "amplitude", 1.0)
    jet = _param(params, "jet", 0.5)
    deficit = _param(params, "moisture_deficit", 0.05)
    kappa = _param(params, "kappa", 4.0)
    bump = _bump(grid, 0.5 * grid.L1, 0.5 * grid.L2, kappa)
    psi = SpectralField.from_physical(grid, amplitude * grid.L1 / (2.0 * np.pi * kappa) * bump)
    u = (-derivative(psi, Axis.Y), derivative(psi, Axis.X))
    x, y = grid.coordinates()
    band = np.exp(kappa * (np.cos(2.0 * np.pi * (y - 0.5 * grid.L2) / grid.L2) - 1.0))
    v1 = SpectralField.from_physical(grid, jet * np.sin(2.0 * np.pi * x / grid.L1) * band)
    qe = SpectralField.from_physical(grid, -deficit * (1.0 - 0.5 * bump))
    return _start(solver, u, v1=v1, qe=qe)


def saturated_wave(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """Divergent plane wave over air at saturation: u = 0, T_e = q_e = 0.

    v = a k/|k| cos(k.x) with k = 2 pi (n1/L1, n2/L2). Every field stays a
    function of k.x, so u stays zero and the positive part of q_e is the only
    nonlinearity. Converging half-wavelengths saturate at once.
    """
    if not isinstance(solver, TAMSolver):
        msg = "the saturated_wave initial condition is defined for the tam system only"
        raise ConfigError(msg, key="ic.name")
    grid = solver.cfg.grid
    k1 = 2.0 * np.pi * int(_param(params, "n1", 7)) / grid.L1
    k2 = 2.0 * np.pi * int(_param(params, "n2", 3)) / grid.L2
    magnitude = float(np.hypot(k1, k2))
    if magnitude == 0.0:
        msg = "n1 = n2 = 0"
        raise ConfigError(msg, key="ic.n1", constraint="wavevector != 0")
    x, y = grid.coordinates()
    wave = _param(params, "amplitude", 0.1) * np.cos(k1 * x + k2 * y)
    return _start(
        solver,
        _zero_velocity(grid),
        v1=SpectralField.from_physical(grid, k1 / magnitude * wave),
        v2=SpectralField.from_physical(grid, k2 / magnitude * wave),
        qe=SpectralField.zeros(grid),
    )


def fixed_point(solver: AnySolver, params: dict[str, Any]) -> AnyState:
    """TAM rest state with constant T_e and q_e < 0."""
    if not isinstance(solver, TAMSolver):
        msg = "the fixed_point initial condition is defined for the tam system only"
        raise ConfigError(msg, key="ic.name")
    grid = solver.cfg.grid
    qe = _param(params, "qe", -0.5)
    if qe > 0:
        msg = f"qe={qe}"
        raise ConfigError(msg, key="ic.qe", constraint="qe <= 0")
    return _start(
        solver,
        _zero_velocity(grid),
        Te=SpectralField.constant(grid, _param(params, "te", 0.0)),
        qe=SpectralField.constant(grid, qe),
    )


INITIAL_CONDITIONS: dict[str, Generator] = {
    "zero": zero,
    "taylor_green": taylor_green,
    "stacked_cells": stacked_cells,
    "random_smooth": random_smooth,
    "discontinuous": discontinuous,
    "vortical": vortical,
    "saturated_wave": saturated_wave,
    "fixed_point": fixed_point,
}


def build_initial_state(solver: AnySolver, name: str, params: dict[str, Any] | None = None) -> AnyState:
    """Generate a named initial condition for a solver.

    Raises:
        ConfigError: Unknown name, bad parameter, or generator not defined for the system
    """
    generator = INITIAL_CONDITIONS.get(name)
    if generator is None:
        msg = f"unknown initial condition '{name}' (known: {', '.join(sorted(INITIAL_CONDITIONS))})"
        raise ConfigError(msg, key="ic.name")
    logger.debug("ic=<%s>, system=<%s> | building initial condition", name, solver.system)
    return generator(solver, dict(params or {}))
