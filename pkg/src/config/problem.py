"""
Turn a validated ``RunConfig`` into meshes, models and initial data.
"""

import importlib
from typing import Callable

import numpy as np

from ..core.exceptions import ConfigurationError
from ..core.gmsh import read_msh
from ..core.mesh import Mesh, any_of, box_mesh, plane_predicate
from ..core.runner import Problem
from ..core.scaling import ScaledModel, nondimensionalise
from ..core.state import StepParams
from ..core.tensors import build_cubic_Z, build_isotropic_Z
from ..core.types import FieldFunction, FloatArray, VectorData
from .run_config import BoxMeshConfig, InitialConfig, InitialKind, MeshConfig, RunConfig

HOT_REJECT_NORM = 1e-6


def build_mesh(config: MeshConfig) -> Mesh:
    if config.box is not None:
        return _box(config.box)
    assert config.msh is not None
    tags = {tag: name.to_region() for tag, name in config.msh.tags.items()}
    return read_msh(config.msh.path, tags)


def _box(box: BoxMeshConfig) -> Mesh:
    dirichlet = any_of(*(plane_predicate(p.axis, p.value) for p in box.dirichlet))
    neumann = (
        any_of(*(plane_predicate(p.axis, p.value) for p in box.neumann)) if box.neumann else None
    )
    return box_mesh(box.lengths, box.divisions, dirichlet, neumann, origin=box.origin)


def build_model(config: RunConfig) -> ScaledModel:
    if config.physical is not None:
        phys = config.physical
        return nondimensionalise(
            phys.params,
            applied_field=phys.applied_field,
            traction=phys.traction,
            gravity=phys.gravity,
            lame_assignment=phys.lame_assignment,
            crystal_basis=phys.crystal_basis,
            kappa=phys.kappa,
        )
    dim = config.dimensionless
    assert dim is not None
    if dim.lambda111 is None:
        Z = build_isotropic_Z(dim.lambda100)
    else:
        Z = build_cubic_Z(dim.lambda100, dim.lambda111, dim.crystal_basis)
    return ScaledModel.dimensionless(
        alpha=dim.alpha,
        mu=dim.mu,
        lam=dim.lam,
        Z=Z,
        kappa=dim.kappa,
        f=dim.f,
        g=dim.g,
        h_ext=dim.h_ext,
    )


def hot_field(seed: int) -> FieldFunction:
    """Random nodal directions drawn uniformly from [-1, 1]^3 (PCG64 stream)."""

    def field(points: FloatArray) -> FloatArray:
        rng = np.random.default_rng(seed)
        values = rng.uniform(-1.0, 1.0, size=points.shape)
        short = np.linalg.norm(values, axis=1) < HOT_REJECT_NORM
        while np.any(short):
            values[short] = rng.uniform(-1.0, 1.0, size=(int(short.sum()), 3))
            short = np.linalg.norm(values, axis=1) < HOT_REJECT_NORM
        return values

    return field


def sinusoidal_field(points: FloatArray) -> FloatArray:
    """(2, sin(x+y+z), cos(x+y+z)) / sqrt(5)."""
    s = points.sum(axis=1)
    return np.column_stack([np.full_like(s, 2.0), np.sin(s), np.cos(s)]) / np.sqrt(5.0)


def load_callback(spec: str) -> Callable[[FloatArray], FloatArray]:
    """Import ``module:function``.

    Raises:
        ConfigurationError: If the target cannot be imported or is not callable.
    """
    module_name, sep, attr = spec.partition(":")
    if not sep:
        raise ConfigurationError(f"Callback must be 'module:function', got {spec!r}", "initial.callback")
    try:
        target = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as e:
        raise ConfigurationError(f"Cannot load callback {spec!r}", "initial.callback", cause=e)
    if not callable(target):
        raise ConfigurationError(f"Callback {spec!r} is not callable", "initial.callback")
    return target


def initial_magnetisation(config: InitialConfig) -> VectorData:
    if config.kind in (InitialKind.UNIFORM, InitialKind.PERTURBED):
        return config.direction
    if config.kind is InitialKind.HOT:
        return hot_field(config.seed)
    if config.kind is InitialKind.SINUSOIDAL:
        return sinusoidal_field
    assert config.callback is not None
    return load_callback(config.callback)


def build_problem(config: RunConfig) -> Problem:
    """Build every object a run needs from ``config``."""
    integration = config.integration
    return Problem(
        name=config.name,
        mesh=build_mesh(config.mesh),
        model=build_model(config),
        m0=initial_magnetisation(config.initial),
        params=StepParams(
            theta=integration.theta,
            k=integration.k,
            solver=config.solver.to_options(),
            unsafe_theta=integration.unsafe_theta,
        ),
        t_final=integration.t_final,
        u0=config.initial.displacement,
        udot0=config.initial.velocity,
        hat_energy=config.diagnostics.hat_energy,
        physical_time=config.physical is not None,
    )
