"""
Experiment presets.

Each preset expands into a list of ``RunConfig`` members (one per swept
value). Physical step sizes are converted into dimensionless ones with the
time unit 1/(gamma mu0 Ms) of the default material.
"""

from typing import Callable, Dict, List, Optional, Sequence

from ..core.exceptions import ConfigurationError
from ..core.scaling import PhysicalParams, compute_scaling
from ..core.types import safe_cast_preset_name
from .run_config import (
    BoxMeshConfig,
    DimensionlessConfig,
    InitialConfig,
    InitialKind,
    IntegrationConfig,
    MeshConfig,
    OutputConfig,
    PhysicalConfig,
    PlaneSpec,
    RunConfig,
)

THETA_NEAR_HALF = 0.50000005

BAR_LENGTHS = [20.0, 6.0, 6.0]
BAR_DIVISIONS = [22, 7, 7]
CUBE_EDGE = 6.0

APPLIED_FIELDS = [0.0, 1e-4, 3e-4, 5e-4, 7e-4]  # multiples of Ms
TRACTIONS = [0.0, 10.0, 25.0, 50.0, 100.0]  # Pa
NUTATION_MULTIPLIERS = [0, 20, 50, 100]
THETAS = [THETA_NEAR_HALF, 0.505, 0.6, 0.7, 0.8, 0.9, 1.0]
CONSTRAINT_STEPS = [4e-3, 2e-3, 1e-3, 5e-4]
CFL_STEPS = [0.01, 0.005, 0.0025, 0.00125, 0.000625]
# mesh size h -> hexahedra per edge of the 6 ell_ex cube
CFL_MESHES = {"1.59": 4, "1.09": 6, "0.84": 8, "0.45": 14}
# The finest mesh is run with the largest step only.
CFL_FINE_MESH = "0.45"


def _time_unit() -> float:
    return compute_scaling(PhysicalParams()).time_scale


def dimensionless_time(seconds: float) -> float:
    return seconds / _time_unit()


def _clamped_x0(lengths: List[float], divisions: List[int], neumann_x: Optional[float] = None,
                origin: Optional[List[float]] = None) -> MeshConfig:
    box = BoxMeshConfig(
        lengths=lengths,
        divisions=divisions,
        origin=origin or [0.0, 0.0, 0.0],
        dirichlet=[PlaneSpec(axis=0, value=(origin or [0.0])[0])],
        neumann=[] if neumann_x is None else [PlaneSpec(axis=0, value=neumann_x)],
    )
    return MeshConfig(box=box)


def _bar_run(name: str, physical: PhysicalConfig, preset: str) -> RunConfig:
    return RunConfig(
        name=name,
        mesh=_clamped_x0(BAR_LENGTHS, BAR_DIVISIONS, neumann_x=BAR_LENGTHS[0]),
        physical=physical,
        initial=InitialConfig(kind=InitialKind.UNIFORM, direction=[1.0, 0.0, 0.0]),
        integration=IntegrationConfig(
            theta=THETA_NEAR_HALF,
            k=dimensionless_time(2e-12),
            t_final=dimensionless_time(1e-9),
        ),
        output=OutputConfig(directory=f"output/{preset}"),
    )


def applied_field() -> List[RunConfig]:
    """Bar under weak fields along +y (direct magnetostriction)."""
    ms = PhysicalParams().Ms
    return [
        _bar_run(
            f"applied_field_{int(round(h * 1e4))}e-4",
            PhysicalConfig(applied_field=[0.0, h * ms, 0.0], gravity=True),
            "applied_field",
        )
        for h in APPLIED_FIELDS
    ]


def traction() -> List[RunConfig]:
    """Bar pulled along +y on its free end (inverse magnetostriction)."""
    return [
        _bar_run(
            f"traction_{int(b)}Pa",
            PhysicalConfig(traction=[0.0, b, 0.0], gravity=True),
            "traction",
        )
        for b in TRACTIONS
    ]


def nutation() -> List[RunConfig]:
    """Half-box clamped on x=0, strong field along x, enlarged magnetostriction."""
    base = PhysicalParams()
    members = []
    for mult in NUTATION_MULTIPLIERS:
        params = base.model_copy(update={"alpha": 0.1, "lambda100": mult * base.lambda100})
        members.append(
            RunConfig(
                name=f"nutation_{mult}lambda",
                mesh=_clamped_x0([1.0, 2.0, 2.0], [3, 6, 6], origin=[0.0, -1.0, -1.0]),
                physical=PhysicalConfig(
                    params=params, applied_field=[base.Ms, 0.0, 0.0], gravity=True
                ),
                initial=InitialConfig(kind=InitialKind.PERTURBED, direction=[0.9, 0.2, 0.0]),
                integration=IntegrationConfig(
                    theta=THETA_NEAR_HALF, k=0.001, t_final=dimensionless_time(1e-10)
                ),
                output=OutputConfig(directory="output/nutation"),
            )
        )
    return members


def _hot_cube(name: str, theta: float, k: float, preset: str, seed: int = 0) -> RunConfig:
    params = PhysicalParams().model_copy(update={"alpha": 0.001})
    return RunConfig(
        name=name,
        mesh=_clamped_x0([CUBE_EDGE] * 3, [2, 2, 2]),
        physical=PhysicalConfig(params=params),
        initial=InitialConfig(kind=InitialKind.HOT, seed=seed),
        integration=IntegrationConfig(theta=theta, k=k, t_final=dimensionless_time(1e-11)),
        output=OutputConfig(directory=f"output/{preset}"),
    )


def theta_sweep() -> List[RunConfig]:
    k = dimensionless_time(1e-15)
    return [_hot_cube(f"theta_{theta:g}", theta, k, "theta_sweep") for theta in THETAS]


def constraint_sweep() -> List[RunConfig]:
    return [_hot_cube(f"constraint_k{k:g}", THETA_NEAR_HALF, k, "constraint_sweep") for k in CONSTRAINT_STEPS]


def cfl_robustness() -> List[RunConfig]:
    """Sinusoidal initial state on a cube, swept over mesh size and time step.

    Every step size runs on the three coarse meshes; the finest mesh runs
    with k = 0.01 only, giving 16 members.
    """
    params = PhysicalParams().model_copy(update={"alpha": 0.001})
    members = []
    for h_label, divisions in CFL_MESHES.items():
        for k in CFL_STEPS[:1] if h_label == CFL_FINE_MESH else CFL_STEPS:
            members.append(
                RunConfig(
                    name=f"cfl_h{h_label}_k{k:g}",
                    mesh=_clamped_x0([CUBE_EDGE] * 3, [divisions] * 3),
                    physical=PhysicalConfig(
                        params=params, applied_field=[0.001 * params.Ms, 0.0, 0.0]
                    ),
                    initial=InitialConfig(kind=InitialKind.SINUSOIDAL),
                    integration=IntegrationConfig(
                        theta=THETA_NEAR_HALF, k=k, t_final=dimensionless_time(1e-11)
                    ),
                    output=OutputConfig(directory="output/cfl_robustness"),
                )
            )
    return members


def verification_cube(
    alpha: float = 0.1, lambda100: float = 1.0, theta: float = 0.7, k: float = 0.05, steps: int = 5
) -> RunConfig:
    """Small coupled cube used by ``verify``."""
    return RunConfig(
        name="verification_cube",
        mesh=_clamped_x0([2.0, 2.0, 2.0], [2, 2, 2], neumann_x=2.0),
        dimensionless=DimensionlessConfig(
            alpha=alpha,
            kappa=1.0,
            mu=2.0,
            lam=1.0,
            lambda100=lambda100,
            f=[0.0, 0.0, -0.01],
            g=[0.0, 0.02, 0.0],
            h_ext=[0.0, 0.3, 0.0],
        ),
        initial=InitialConfig(kind=InitialKind.HOT, seed=7),
        integration=IntegrationConfig(theta=theta, k=k, t_final=steps * k),
        output=OutputConfig(directory="output/verify", csv=False),
    )


PRESETS: Dict[str, Callable[[], List[RunConfig]]] = {
    "applied_field": applied_field,
    "traction": traction,
    "nutation": nutation,
    "theta_sweep": theta_sweep,
    "constraint_sweep": constraint_sweep,
    "cfl_robustness": cfl_robustness,
}


def preset_names() -> List[str]:
    return list(PRESETS)


def build_preset(name: str, overrides: Sequence[str] = ()) -> List[RunConfig]:
    """Instantiate preset ``name`` and apply overrides to every member.

    Raises:
        ConfigurationError: Unknown preset or invalid override.
    """
    try:
        key = safe_cast_preset_name(name, preset_names())
    except ValueError as e:
        raise ConfigurationError(str(e), config_key=name)
    members = PRESETS[key]()
    if overrides:
        members = [m.with_overrides(list(overrides)) for m in members]
    return members
