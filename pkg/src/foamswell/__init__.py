"""Coupled beam and pore-pressure simulator for a swelling foam."""
from .beam import BeamProblem, InitialDeformation, beam_energy, step_beam
from .config import ConfigError, SimConfig, parse_config
from .constitutive import (BoundarySource, BoundedLipschitzLaw, DensityLaw, MaterialSystem,
                           PhysicalConstants, validate_assumptions)
from .coupling import CoupledState, CouplingConfig, RunReport, coupled_step, run_simulation
from .deformation import DeformationSnapshot
from .pore import DiffusionProblem, step_diffusion

__all__ = [
    "BeamProblem", "InitialDeformation", "beam_energy", "step_beam", "ConfigError", "SimConfig",
    "parse_config", "BoundarySource", "BoundedLipschitzLaw", "DensityLaw", "MaterialSystem",
    "PhysicalConstants", "validate_assumptions", "CoupledState", "CouplingConfig", "RunReport",
    "coupled_step", "run_simulation", "DeformationSnapshot", "DiffusionProblem", "step_diffusion",
]
