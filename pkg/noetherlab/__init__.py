from .catalog import CatalogEntry, builtin, kepler_reference_symmetry, names
from .errors import ConfigurationError, ContactDegenerate, DomainError, ExpressionError, \
                    ExpressionSyntaxError, IndexOutOfRange, NoetherError, UnknownIdentifier, \
                    UnknownSystem
from .exprcore import Expression, Jet2, eval_jet, evaluate, fd_jet, parse_expression
from .flow import Trajectory, action_integral, bump_profile, conservation_drift, flow_symmetry, \
                  integrate_characteristic, permutation_check, stationarity_probe
from .geometry import FieldValue, OneFormValue, Perturbation, PhasePoint, SystemSpec, \
                      characteristic_field, dpc_contract, elementary_action, is_horizontal, \
                      pc_contract, perturbed_elementary_action, reeb_field
from .integrability import IntegrabilityReport, commutation_report, commuting_adjust, \
                           independence_rank, integrability_report, invariance_matrix
from .math import Residual
from .noether import DerivedSymmetry, ExplicitSymmetry, ResidualReport, SymmetryCandidate, \
                     WeakData, contact_hamiltonian_field, inverse_noether, kernel_membership, \
                     lie_bracket, noether_integral, symmetry_residuals, weak_to_strong
from .sampling import parse_point, sample_points

__all__ = [
    'NoetherError',
    'ConfigurationError',
    'ExpressionError',
    'ExpressionSyntaxError',
    'UnknownIdentifier',
    'IndexOutOfRange',
    'DomainError',
    'ContactDegenerate',
    'UnknownSystem',
    'Residual',
    'Expression',
    'Jet2',
    'parse_expression',
    'eval_jet',
    'evaluate',
    'fd_jet',
    'PhasePoint',
    'FieldValue',
    'OneFormValue',
    'Perturbation',
    'SystemSpec',
    'characteristic_field',
    'elementary_action',
    'perturbed_elementary_action',
    'reeb_field',
    'pc_contract',
    'dpc_contract',
    'is_horizontal',
    'SymmetryCandidate',
    'ExplicitSymmetry',
    'DerivedSymmetry',
    'WeakData',
    'ResidualReport',
    'inverse_noether',
    'symmetry_residuals',
    'noether_integral',
    'contact_hamiltonian_field',
    'weak_to_strong',
    'lie_bracket',
    'kernel_membership',
    'Trajectory',
    'integrate_characteristic',
    'flow_symmetry',
    'conservation_drift',
    'action_integral',
    'permutation_check',
    'bump_profile',
    'stationarity_probe',
    'IntegrabilityReport',
    'commuting_adjust',
    'commutation_report',
    'independence_rank',
    'invariance_matrix',
    'integrability_report',
    'CatalogEntry',
    'builtin',
    'names',
    'kepler_reference_symmetry',
    'sample_points',
    'parse_point',
]
