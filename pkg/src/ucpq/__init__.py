"""Unit commitment as QUBO: compilers, reference checker and desk-scale solvers."""
from .instance import UcpInstance, UnitSpec, load_instance, paper_example, save_instance, validate_instance
from .qubo import QuboMatrix, IsingModel, matrix_metrics, qubo_energy, qubo_to_ising, ising_energy, raw_energy
from .reference import Schedule, check_feasible, dispatch_cost, enumerate_optimal, true_cost
from .tailored import (
    PAPER_PENALTIES,
    PenaltyFactors,
    build_layout,
    compile_tailored,
    decode,
    default_penalties,
    validate_penalties,
)
from .generic import compare_formulations, compile_generic
from .solve import AnnealParams, brute_force, simulated_annealing, solve_and_report

__version__ = "0.1.0"
