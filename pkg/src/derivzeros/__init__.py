"""Zeros of higher derivatives of random polynomials, at scale."""

from .ensembles import (Augmented, CoulombGas, FixedRoots, IidZeros, McmcConfig, PairedChoice,
                        Perturbed, RemoveOne, coulomb_energy, coulomb_sweep, log_cesaro_stat,
                        run_chain, sample)
from .measures import (AtomMixture, ComplexGaussian, CustomGrid, SequenceSpec, UniformAnnulus,
                       UniformCircle, UniformDisk)
from .polycore import RootSet, elem_sym_reciprocals, lnk, log_abs_poly, newton_ratio
from .potential import (EmpiricalMeasure, EquilibriumMeasure, energy, equilibrium_radial,
                        ks_radial, log_potential, weighted_energy)
from .radial import CustomRadial, MittagLeffler
from .rootfind import AberthConfig, RootResult, kth_derivative_roots, verify_gauss_lucas
from .scaled import ScaledComplex
from .transport import Estimate, wasserstein1_estimate, wasserstein1_exact

__version__ = "0.1.0"

__all__ = [
    "AberthConfig", "AtomMixture", "Augmented", "ComplexGaussian", "CoulombGas", "CustomGrid",
    "CustomRadial", "EmpiricalMeasure", "EquilibriumMeasure", "Estimate", "FixedRoots",
    "IidZeros", "McmcConfig", "MittagLeffler", "PairedChoice", "Perturbed", "RemoveOne",
    "RootResult", "RootSet", "ScaledComplex", "SequenceSpec", "UniformAnnulus", "UniformCircle",
    "UniformDisk", "coulomb_energy", "coulomb_sweep", "elem_sym_reciprocals", "energy",
    "equilibrium_radial", "kth_derivative_roots", "ks_radial", "lnk", "log_abs_poly",
    "log_cesaro_stat", "log_potential", "newton_ratio", "run_chain", "sample",
    "verify_gauss_lucas", "wasserstein1_estimate", "wasserstein1_exact", "weighted_energy",
]
