"""
Run driver: executes the time loop for a fully built problem and collects
the per-step trajectory rows.
"""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import structlog

from .diagnostics import EnergyBreakdown, averages, constraint_metrics, energy
from .exceptions import InvalidInputError
from .integrator import Integrator, StepReport, init_state
from .mesh import Mesh
from .protocols import StepObserver
from .scaling import ScaledModel
from .state import Assemblies, State, StepParams
from .types import TrajectoryRowDict, VectorData

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything needed to run one simulation."""

    name: str
    mesh: Mesh
    model: ScaledModel
    m0: VectorData
    params: StepParams
    t_final: float
    u0: VectorData = (0.0, 0.0, 0.0)
    udot0: VectorData = (0.0, 0.0, 0.0)
    hat_energy: bool = False
    physical_time: bool = False

    @property
    def n_steps(self) -> int:
        """ceil(T / k), ignoring round-off in the ratio."""
        return int(math.ceil(round(self.t_final / self.params.k, 9)))


@dataclass
class RunResult:
    name: str
    rows: List[TrajectoryRowDict] = field(default_factory=list)
    reports: List[StepReport] = field(default_factory=list)
    initial_state: Optional[State] = None
    final_state: Optional[State] = None
    wall_time: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.rows) - 1


def trajectory_row(
    state: State,
    mesh: Mesh,
    energies: EnergyBreakdown,
    energy_residual: float,
    t: float,
) -> TrajectoryRowDict:
    """One output row; ``t`` is already in the output time unit."""
    mx, my, mz, ux, uy, uz = averages(state, mesh)
    metrics = constraint_metrics(state, mesh)
    return TrajectoryRowDict(
        t=t,
        x_mag_avg=mx,
        y_mag_avg=my,
        z_mag_avg=mz,
        x_disp_avg=ux,
        y_disp_avg=uy,
        z_disp_avg=uz,
        totalenergy=energies.total,
        kinetic=energies.kinetic,
        exchange=energies.exchange,
        elastic=energies.elastic,
        zeeman=energies.zeeman,
        work=energies.work,
        constraint_l1=metrics.l1_violation,
        nodal_max=metrics.nodal_max,
        energy_residual=energy_residual,
    )


def run(
    problem: Problem,
    max_steps: Optional[int] = None,
    observers: Sequence[StepObserver] = (),
    keep_reports: bool = True,
) -> RunResult:
    """
    Execute ceil(T/k) steps (or ``max_steps`` if smaller).

    Raises:
        InvalidInputError: If T < k.
        StepError: From the first failing step.
    """
    params = problem.params
    if problem.t_final < params.k:
        raise InvalidInputError(
            f"Final time {problem.t_final} is shorter than one step k={params.k}",
            field="t_final",
        )
    n_steps = problem.n_steps if max_steps is None else min(problem.n_steps, max_steps)

    asm = Assemblies.build(problem.mesh, problem.model)
    integrator = Integrator(asm, params, hat_energy=problem.hat_energy)
    state = init_state(problem.mesh, problem.m0, problem.u0, problem.udot0)

    def out_time(t: float) -> float:
        return problem.model.scaling.seconds(t) if problem.physical_time else t

    result = RunResult(name=problem.name, initial_state=state)
    result.rows.append(
        trajectory_row(state, problem.mesh, energy(state, asm), 0.0, out_time(state.t))
    )
    for observer in observers:
        observer.on_start(state)

    logger.info(
        "run_started",
        run=problem.name,
        nodes=problem.mesh.n_nodes,
        tets=problem.mesh.n_tets,
        steps=n_steps,
        k=params.k,
        theta=params.theta,
    )
    started = time.perf_counter()
    for _ in range(n_steps):
        state, report = integrator.step(state)
        result.rows.append(
            trajectory_row(
                state, problem.mesh, report.energies, report.law.residual, out_time(state.t)
            )
        )
        if keep_reports:
            result.reports.append(report)
        for observer in observers:
            observer.on_step(state, report)

    result.final_state = state
    result.wall_time = time.perf_counter() - started
    for observer in observers:
        observer.on_finish(state)
    logger.info(
        "run_finished",
        run=problem.name,
        steps=n_steps,
        wall_time=round(result.wall_time, 3),
        final_energy=result.rows[-1]["totalenergy"],
    )
    return result
