"""
A pytest plugin to check the systems at seeded sample points.

Usage::

    @pytest.mark.noether(system='kepler', samples=20, rho_min=0.1, mu=2.0)
    def test_something(noether_system, phase_points, stopwatch):
        with stopwatch:
            ...
        assert stopwatch < 1.0

The marker's keywords other than ``system``, ``samples``, ``seed``, ``rho_min``
override the system parameters. The command-line options set the defaults
for the tests without explicit values.
"""
from __future__ import annotations

import time
from typing import Any, Callable

import pytest

from noetherlab import catalog, math, sampling
from noetherlab.catalog import CatalogEntry
from noetherlab.geometry import PhasePoint

DEFAULT_SYSTEM = 'kepler'
DEFAULT_SAMPLES = 20
_OWN_OPTIONS = ('system', 'samples', 'seed', 'rho_min')


class Stopwatch(math.Numeric):
    """
    The wall-clock duration of a code block, comparable with plain numbers.

    Reading it while running gives the time so far; before the start, zero.
    """

    def __init__(self, clock: Callable[[], float] = time.perf_counter) -> None:
        super().__init__()
        self._clock = clock
        self._started: float | None = None
        self._stopped: float | None = None

    @property
    def _value(self) -> float:
        return self.seconds

    @property
    def seconds(self) -> float:
        if self._started is None:
            return 0.0
        end = self._clock() if self._stopped is None else self._stopped
        return end - self._started

    def __repr__(self) -> str:
        state = 'idle' if self._started is None else 'running' if self._stopped is None else 'stopped'
        return f'<Stopwatch: {self.seconds}s ({state})>'

    def __enter__(self) -> Stopwatch:
        self._started = self._clock()
        self._stopped = None
        return self

    def __exit__(self, *args: Any) -> None:
        self._stopped = self._clock()


def _options(request: Any) -> dict[str, Any]:
    options: dict[str, Any] = {
        'system': DEFAULT_SYSTEM,
        'samples': request.config.getoption('noether_samples') or DEFAULT_SAMPLES,
        'seed': request.config.getoption('noether_seed'),
        'rho_min': None,
    }
    if options['seed'] is None:
        options['seed'] = sampling.DEFAULT_SEED
    for marker in reversed(list(request.node.iter_markers('noether'))):
        options.update(marker.kwargs)
        if marker.args:
            options['system'] = marker.args[0]
    return options


@pytest.fixture()
def noether_system(request: Any) -> CatalogEntry:
    """The built-in system named by the ``noether`` marker, with its parameter overrides."""
    options = _options(request)
    entry = catalog.builtin(options['system'])
    params = {key: value for key, value in options.items() if key not in _OWN_OPTIONS}
    return entry.with_params(**params) if params else entry


@pytest.fixture()
def phase_points(request: Any, noether_system: CatalogEntry) -> tuple[PhasePoint, ...]:
    """The seeded sample of the system's domain."""
    options = _options(request)
    return noether_system.sample(options['samples'], options['seed'], rho_min=options['rho_min'])


@pytest.fixture()
def stopwatch() -> Stopwatch:
    return Stopwatch()


def pytest_configure(config: Any) -> None:
    config.addinivalue_line('markers', "noether: choose the system and the sampling of its points.")


def pytest_addoption(parser: Any) -> None:
    group = parser.getgroup("noether symmetries")
    group.addoption("--noether-seed", dest='noether_seed', type=int, default=None,
                    help="The default seed of the sampled phase points.")
    group.addoption("--noether-samples", dest='noether_samples', type=int, default=None,
                    help="The default number of the sampled phase points.")
