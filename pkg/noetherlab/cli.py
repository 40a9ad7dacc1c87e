"""
The command-line front end: ``noetherlab COMMAND [options]`` or ``python -m noetherlab``.

Every command prints one JSON document (to ``--output`` or stdout)::

    {"schema_version": "1", "command": ..., "system": ..., "params": {...},
     "results": {...}, "diagnostics": [...]}

The keys are emitted in the order of their insertion (as documented per command
below); the floats are printed at 17 significant digits, the non-finite ones
as ``null``. Same options and seed produce byte-identical output.

Commands and their ``results`` keys:

* ``derive``: integral, point, tau, xi, eta, value, contraction, identity_residual, z_of_f, is_integral.
* ``verify``: tolerance, samples, seed, then per integral: max_rel, identity_max_rel, passed.
* ``flow``: generator, samples, step, final, drift (per known integral).
* ``action``: samples, step, pairs, slope, curvature.
* ``integrability``: m, r, n, dimension_condition, brackets, characteristic_brackets,
  independence_rank, singular_values, field_rank, invariance_mean, invariance_deviation, passed.
* ``catalog``: systems (with ``--list``) or system (with ``--export``).

Exit codes: 0 on success; 2 if a tolerance is violated in ``verify`` or
``integrability``; 1 on any error (with ``{"error": {"type", "message"}}`` on stderr).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from typing import Any, Iterator, Mapping, Sequence, TextIO

import numpy as np

from noetherlab import catalog, flow, integrability, noether, sampling
from noetherlab.catalog import CatalogEntry
from noetherlab.errors import ConfigurationError, NoetherError
from noetherlab.exprcore import Expression
from noetherlab.geometry import TOLERANCE, SystemSpec, pc_contract

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1'
COMMANDS = ('derive', 'verify', 'flow', 'action', 'integrability', 'catalog')
SEED_VARIABLE = 'NOETHER_SEED'
DEFINITENESS = 1e-8  # the relative Z(F) above which `derive` warns
RHO_MIN = 1e-3


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    system: str | None = None
    system_file: str | None = None
    params: Mapping[str, float] = dataclasses.field(default_factory=dict)
    point: str | None = None
    integrals: tuple[str, ...] = ()
    expression: str | None = None
    samples: int = 20
    seed: int = sampling.DEFAULT_SEED
    tolerance: float = TOLERANCE
    duration: float = 1.0
    step: float = 1e-3
    symmetry: str | None = None
    s: float = 0.01
    csv: str | None = None
    amplitudes: tuple[float, ...] = (-1e-2, -1e-3, 1e-3, 1e-2)
    commuting: int | None = None
    list_systems: bool = False
    export: str | None = None
    output: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigurationError(f"Unknown command {self.command!r}.")
        if self.command != 'catalog' and (self.system is None) == (self.system_file is None):
            raise ConfigurationError("Exactly one of --system or --system-file is required.")
        if self.command == 'catalog' and self.list_systems == (self.export is not None):
            raise ConfigurationError("Exactly one of --list or --export is required.")
        if self.command in ('derive', 'flow', 'action') and self.point is None:
            raise ConfigurationError(f"The {self.command} command requires --point.")
        if self.command == 'derive' and (not self.integrals) == (self.expression is None):
            raise ConfigurationError("Exactly one of --integral or --expression is required.")
        if self.command == 'integrability' and not self.integrals:
            raise ConfigurationError("The integrability command requires at least one --integral.")
        for name in ('tolerance', 'step', 'duration'):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"--{name} must be positive, got {value}.")
        if self.samples < 1:
            raise ConfigurationError(f"--samples must be positive, got {self.samples}.")


def _parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}") from None


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_mutually_exclusive_group()
    group.add_argument('--system', help="A built-in system: " + ', '.join(catalog.names()))
    group.add_argument('--system-file', help="A JSON file with the system spec.")
    common.add_argument('--param', dest='params', action='append', type=_parse_param, default=[],
                        metavar='NAME=VALUE', help="Override a parameter of the system.")
    common.add_argument('--output', help="Write the JSON document to the file instead of stdout.")
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help="Log more to stderr (-v for info, -vv for debug).")

    parser = argparse.ArgumentParser(prog='noetherlab', description=__doc__.splitlines()[1])
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('derive', parents=[common], help="The symmetry of an integral at a point.")
    p.add_argument('--integral', dest='integrals', action='append', default=[])
    p.add_argument('--expression')
    p.add_argument('--point', required=True)

    p = commands.add_parser('verify', parents=[common], help="The symmetry conditions at sampled points.")
    p.add_argument('--integral', dest='integrals', action='append', default=[])
    p.add_argument('--samples', type=int, default=20)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--tolerance', type=float, default=TOLERANCE)

    p = commands.add_parser('flow', parents=[common], help="Integrate a trajectory.")
    p.add_argument('--point', required=True)
    p.add_argument('--duration', type=float, default=1.0)
    p.add_argument('--step', type=float, default=1e-3)
    p.add_argument('--symmetry', help="Flow the symmetry of this integral instead of the motion.")
    p.add_argument('--s', type=float, default=0.01)
    p.add_argument('--csv', help="Write the samples as CSV to this file.")

    p = commands.add_parser('action', parents=[common], help="Probe the action for stationarity.")
    p.add_argument('--point', required=True)
    p.add_argument('--duration', type=float, default=1.0)
    p.add_argument('--step', type=float, default=1e-3)
    p.add_argument('--amplitudes', type=_parse_floats, default=RunConfig.amplitudes)

    p = commands.add_parser('integrability', parents=[common], help="Check the integrability hypotheses.")
    p.add_argument('--integral', dest='integrals', action='append', default=[])
    p.add_argument('--commuting', type=int, default=None, metavar='R')
    p.add_argument('--samples', type=int, default=20)
    p.add_argument('--seed', type=int, default=None)

    p = commands.add_parser('catalog', parents=[common], help="List or export the built-in systems.")
    p.add_argument('--list', dest='list_systems', action='store_true')
    p.add_argument('--export', metavar='NAME')
    return parser


def config_from_args(args: argparse.Namespace, environ: Mapping[str, str] = os.environ) -> RunConfig:
    seed = getattr(args, 'seed', None)
    if environ.get(SEED_VARIABLE):
        try:
            seed = int(environ[SEED_VARIABLE])
        except ValueError:
            raise ConfigurationError(f"{SEED_VARIABLE} must be an integer, "
                                     f"got {environ[SEED_VARIABLE]!r}.") from None
    fields = {field.name for field in dataclasses.fields(RunConfig)}
    values = {key: value for key, value in vars(args).items() if key in fields and value is not None}
    values['params'] = dict(args.params)
    values['integrals'] = tuple(getattr(args, 'integrals', ()))
    values['seed'] = sampling.DEFAULT_SEED if seed is None else seed
    config = RunConfig(**values)
    config.validate()
    return config


#
# JSON with the fixed float format:
#

def _encode(value: Any) -> Iterator[str]:
    if isinstance(value, (bool, np.bool_)):
        yield 'true' if value else 'false'
    elif value is None:
        yield 'null'
    elif isinstance(value, (int, np.integer)):
        yield str(int(value))
    elif isinstance(value, (float, np.floating)):
        yield f"{float(value):.17g}" if math.isfinite(value) else 'null'
    elif isinstance(value, str):
        yield json.dumps(value, ensure_ascii=False)
    elif isinstance(value, Mapping):
        yield '{'
        for index, (key, item) in enumerate(value.items()):
            yield (', ' if index else '') + json.dumps(str(key), ensure_ascii=False) + ': '
            yield from _encode(item)
        yield '}'
    elif isinstance(value, (list, tuple, np.ndarray)):
        yield '['
        for index, item in enumerate(value):
            if index:
                yield ', '
            yield from _encode(item)
        yield ']'
    else:
        raise TypeError(f"Cannot encode {value!r} as JSON.")


def dumps(value: Any) -> str:
    return ''.join(_encode(value))


#
# The commands:
#

def load_entry(config: RunConfig) -> CatalogEntry:
    if config.system is not None:
        entry = catalog.builtin(config.system)
    else:
        assert config.system_file is not None
        with open(config.system_file, encoding='utf-8') as f:
            try:
                document = json.load(f)
            except ValueError as e:
                raise ConfigurationError(f"Malformed JSON in {config.system_file}: {e}") from e
        spec = SystemSpec.from_document(document)
        entry = CatalogEntry(name=config.system_file, spec=spec, box=((sampling.BOX),) * (2 * spec.n + 1))
    return entry.with_params(**config.params) if config.params else entry


def _integrals(entry: CatalogEntry, names: Sequence[str]) -> dict[str, Expression]:
    return {name: entry.spec.integral(name) for name in (names or entry.spec.integrals)}


def _derive(config: RunConfig, entry: CatalogEntry, diagnostics: list[str]) -> tuple[dict[str, Any], int]:
    sys_ = entry.spec
    x = sampling.parse_point(config.point or '', sys_.n)
    if config.expression is not None:
        name, integral = config.expression, sys_.parse(config.expression)
    else:
        name = config.integrals[0]
        integral = sys_.integral(name)
    zeta = noether.inverse_noether(sys_, integral, x)
    value = sys_.jet(integral, x, order=0).value
    contraction = pc_contract(sys_, zeta, x)
    defect = noether.integral_defect(sys_, integral, x)
    is_integral = defect.within(DEFINITENESS)
    if not is_integral:
        message = f"{name} is not an integral at the point: Z(F)={defect.absolute!r}."
        logger.warning(message)
        diagnostics.append(message)
    results = {
        'integral': name,
        'point': list(x.vector),
        'tau': zeta.tau,
        'xi': list(zeta.xi),
        'eta': list(zeta.eta),
        'value': value,
        'contraction': contraction,
        'identity_residual': abs(contraction - value),
        'z_of_f': defect.absolute,
        'is_integral': is_integral,
    }
    return results, 0


def _verify(config: RunConfig, entry: CatalogEntry, diagnostics: list[str]) -> tuple[dict[str, Any], int]:
    sys_ = entry.spec
    points = entry.sample(config.samples, config.seed, rho_min=RHO_MIN, spec=sys_)
    results: dict[str, Any] = {'tolerance': config.tolerance, 'samples': len(points), 'seed': config.seed}
    failed = False
    for name, integral in _integrals(entry, config.integrals).items():
        zeta = noether.DerivedSymmetry(integral, name)
        worst, identity = 0.0, 0.0
        for x in points:
            report = noether.symmetry_residuals(sys_, zeta, x)
            worst = max(worst, float(report.max_rel))
            value = sys_.jet(integral, x, order=0).value
            identity = max(identity, abs(noether.noether_integral(sys_, zeta, x) - value) / (1 + abs(value)))
        passed = worst <= config.tolerance and identity <= config.tolerance
        if not passed:
            diagnostics.append(f"{name} violates the tolerance {config.tolerance!r}.")
        failed = failed or not passed
        results[name] = {'max_rel': worst, 'identity_max_rel': identity, 'passed': passed}
    return results, 2 if failed else 0


def _flow(config: RunConfig, entry: CatalogEntry, diagnostics: list[str]) -> tuple[dict[str, Any], int]:
    sys_ = entry.spec
    x = sampling.parse_point(config.point or '', sys_.n)
    if config.symmetry is not None:
        zeta = noether.DerivedSymmetry(sys_.integral(config.symmetry), config.symmetry)
        traj = flow.flow_symmetry(sys_, zeta, x, config.s, config.step)
    else:
        traj = flow.integrate_characteristic(sys_, x, config.duration, config.step)
    if config.csv is not None:
        with open(config.csv, 'w', encoding='utf-8', newline='') as f:
            traj.to_csv(f)
    drift = {name: flow.conservation_drift(expr, traj, dict(sys_.params))
             for name, expr in sys_.integrals.items()}
    results = {
        'generator': traj.generator,
        'samples': len(traj),
        'step': traj.step,
        'final': list(traj.final.vector),
        'drift': drift,
    }
    return results, 0


def _action(config: RunConfig, entry: CatalogEntry, diagnostics: list[str]) -> tuple[dict[str, Any], int]:
    sys_ = entry.spec
    x = sampling.parse_point(config.point or '', sys_.n)
    traj = flow.integrate_characteristic(sys_, x, config.duration, config.step)
    direction = np.concatenate((np.zeros(sys_.n + 1), np.ones(sys_.n)))
    probe = flow.stationarity_probe(sys_, traj, flow.bump_profile(traj, direction), config.amplitudes)
    results = {
        'samples': len(traj),
        'step': traj.step,
        'pairs': [list(pair) for pair in probe.pairs],
        'slope': probe.slope,
        'curvature': probe.curvature,
    }
    return results, 0


def _integrability(config: RunConfig, entry: CatalogEntry, diagnostics: list[str]) -> tuple[dict[str, Any], int]:
    sys_ = entry.spec
    integrals = _integrals(entry, config.integrals)
    symmetries = [noether.DerivedSymmetry(expr, name) for name, expr in integrals.items()]
    r = len(symmetries) if config.commuting is None else config.commuting
    points = entry.sample(config.samples, config.seed, rho_min=RHO_MIN, spec=sys_)
    report = integrability.integrability_report(sys_, symmetries, r, points)
    passed = report.passed()
    if not passed:
        diagnostics.append("The integrability hypotheses are violated at the sampled points.")
    results = {
        'm': report.m,
        'r': report.r,
        'n': report.n,
        'dimension_condition': report.dimension_condition,
        'brackets': report.commutation.matrix,
        'characteristic_brackets': report.commutation.characteristic,
        'independence_rank': report.independence.rank,
        'singular_values': report.independence.singular_values,
        'field_rank': report.fields.rank,
        'invariance_mean': report.invariance.mean,
        'invariance_deviation': report.invariance.deviation,
        'passed': passed,
    }
    return results, 0 if passed else 2


def _catalog(config: RunConfig) -> dict[str, Any]:
    if config.list_systems:
        return {'systems': list(catalog.names())}
    assert config.export is not None
    return {'system': catalog.builtin(config.export).spec.to_document()}


def run(config: RunConfig, stdout: TextIO | None = None) -> int:
    """Run the validated configuration; errors are raised, not mapped."""
    stdout = sys.stdout if stdout is None else stdout
    diagnostics: list[str] = []
    if config.command == 'catalog':
        system, params, results, code = None, {}, _catalog(config), 0
    else:
        entry = load_entry(config)
        handler = {
            'derive': _derive,
            'verify': _verify,
            'flow': _flow,
            'action': _action,
            'integrability': _integrability,
        }[config.command]
        results, code = handler(config, entry, diagnostics)
        system, params = entry.name, dict(entry.spec.params)
    document = {
        'schema_version': SCHEMA_VERSION,
        'command': config.command,
        'system': system,
        'params': params,
        'results': results,
        'diagnostics': diagnostics,
    }
    text = dumps(document) + '\n'
    if config.output is not None:
        with open(config.output, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=stderr, format='%(levelname)s %(name)s: %(message)s')
    try:
        return run(config_from_args(args), stdout)
    except (NoetherError, OSError) as e:
        stderr.write(dumps({'error': {'type': type(e).__name__, 'message': str(e)}}) + '\n')
        return 1
