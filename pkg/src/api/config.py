"""
Scenario configuration: flat `section.key = value` documents validated against a field schema.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigError, ParameterError
from src.core.model import (MoleculeParams, UnitSystem, REFERENCE_ENERGY, REFERENCE_HBAR,
                            REFERENCE_LENGTH, REFERENCE_MASS, REFERENCE_TUNNELING, derive_two_level)
from src.core.spectral import (DebyeSolventParams, GasMicroParams, SpectralDensity, debye_density,
                               gas_density_from_micro)

logger = logging.getLogger(__name__)

PATHS = ('general', 'dilute', 'isolated', 'oracle')
BATH_KINDS = ('ohmic', 'subohmic', 'none', 'tabulated')
ALL_COLUMNS = ('t', 'P_R', 'P_1', 'P_2', 'Re_coherence', 'Im_coherence')


@dataclass
class ConfigField:
    """One documented configuration key"""
    name: str
    type: str  # 'real', 'integer', 'text', 'choice'
    required: bool = False
    default: Any = None
    description: str = ""
    choices: Tuple[str, ...] = ()


SCHEMA: List[ConfigField] = [
    ConfigField('molecule.delta_tunnel', 'real', default=REFERENCE_TUNNELING,
                description="tunneling strength Delta"),
    ConfigField('molecule.delta_local', 'real', description="localization strength delta"),
    ConfigField('molecule.omega', 'real', description="harmonic frequency of each well, rad/s"),
    ConfigField('molecule.eta', 'real', description="double-well asymmetry"),
    ConfigField('molecule.hbar', 'real', default=REFERENCE_HBAR, description="dimensionless h"),
    ConfigField('molecule.initial_state', 'choice', default='L', choices=('L', 'R')),
    ConfigField('units.mass', 'real', default=REFERENCE_MASS, description="kg"),
    ConfigField('units.energy', 'real', default=REFERENCE_ENERGY, description="J"),
    ConfigField('units.length', 'real', default=REFERENCE_LENGTH, description="m"),
    ConfigField('units.temperature', 'real', default=0.0, description="K, validity check only"),
    ConfigField('bath.kind', 'choice', required=True, choices=BATH_KINDS),
    ConfigField('bath.j0', 'real', description="coupling strength J0"),
    ConfigField('bath.cutoff', 'real', description="cut-off frequency"),
    ConfigField('bath.table', 'text', description="two-column omega<TAB>J file"),
    ConfigField('bath.gas.density', 'real', description="number density rho"),
    ConfigField('bath.gas.thermal_energy', 'real', description="k_B T in units of U0"),
    ConfigField('bath.gas.range', 'real', description="interaction range R"),
    ConfigField('bath.gas.measure', 'choice', choices=('printed', 'radial')),
    ConfigField('bath.solvent.dipole_change', 'real', description="Debye"),
    ConfigField('bath.solvent.radius', 'real', description="Onsager radius, angstrom"),
    ConfigField('bath.solvent.eps_static', 'real'),
    ConfigField('bath.solvent.eps_inf', 'real'),
    ConfigField('bath.solvent.debye_time', 'real', description="s"),
    ConfigField('bath.solvent.rule', 'choice', choices=('onsager', 'cavity')),
    ConfigField('time.t_min', 'real', default=0.0),
    ConfigField('time.t_max', 'real', required=True),
    ConfigField('time.points', 'integer', default=1000),
    ConfigField('time.spacing', 'choice', default='linear', choices=('linear', 'log')),
    ConfigField('run.path', 'choice', default='general', choices=PATHS),
    ConfigField('run.tolerance', 'real', default=1e-6),
    ConfigField('run.columns', 'text', default='t,P_R'),
    ConfigField('run.output', 'text', description="CSV file name inside --out"),
    ConfigField('oracle.modes', 'integer', default=200),
    ConfigField('oracle.omega_max', 'real'),
    ConfigField('oracle.scheme', 'choice', default='linear', choices=('linear', 'log')),
    ConfigField('oracle.threshold', 'real', default=0.01),
    ConfigField('oracle.truncation_bound', 'real', default=1e-3),
]

FIELDS = {spec.name: spec for spec in SCHEMA}
GAS_KEYS = ('bath.gas.density', 'bath.gas.thermal_energy', 'bath.gas.range')
SOLVENT_KEYS = ('bath.solvent.dipole_change', 'bath.solvent.radius', 'bath.solvent.eps_static',
                'bath.solvent.eps_inf', 'bath.solvent.debye_time')
SWEEP_KEYS = {'eta': 'molecule.eta', 'delta': 'molecule.delta_local',
              'j0': 'bath.j0', 'cutoff': 'bath.cutoff'}


def _convert(spec: ConfigField, raw: Any) -> Any:
    if spec.type == 'real':
        return float(raw)
    if spec.type == 'integer':
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"not an integer: {raw}")
        return int(raw)
    value = str(raw).strip()
    if spec.type == 'choice' and value not in spec.choices:
        raise ValueError(f"must be one of {', '.join(spec.choices)}")
    return value


def _validate_values(data: Dict[str, Any]) -> Tuple[Dict[str, Any], List[str]]:
    """Type-check every key against the schema and fill defaults; collects all violations"""
    violations = []
    values = {}
    for key in data:
        if key not in FIELDS:
            violations.append(f"unknown key '{key}'")
    for spec in SCHEMA:
        if spec.name not in data:
            if spec.required:
                violations.append(f"missing required key '{spec.name}'")
            elif spec.default is not None:
                values[spec.name] = spec.default
            continue
        try:
            values[spec.name] = _convert(spec, data[spec.name])
        except (TypeError, ValueError) as exc:
            violations.append(f"'{spec.name}': {exc}")
    return values, violations


def _check_consistency(values: Dict[str, Any], explicit: Sequence[str]) -> List[str]:
    violations = []
    has = set(explicit).__contains__
    gas = [key for key in GAS_KEYS if has(key)]
    solvent = [key for key in SOLVENT_KEYS if has(key)]
    direct = [key for key in ('bath.j0', 'bath.cutoff') if has(key)]
    table = has('bath.table')

    blocks = [name for name, present in (('gas', gas), ('solvent', solvent), ('j0/cutoff', direct),
                                          ('table', table)) if present]
    if len(blocks) > 1:
        violations.append(f"conflicting bath blocks: {', '.join(blocks)}")
    kind = values.get('bath.kind')
    if kind == 'none' and blocks:
        violations.append("bath.kind = none takes no bath parameters")
    elif kind == 'tabulated' and not table:
        violations.append("bath.kind = tabulated needs bath.table")
    elif kind == 'subohmic' and (solvent or table):
        violations.append("sub-ohmic bath takes j0/cutoff or a gas block")
    elif kind == 'ohmic' and (gas or table):
        violations.append("ohmic bath takes j0/cutoff or a solvent block")
    if kind in ('ohmic', 'subohmic') and len(blocks) <= 1:
        if direct and len(direct) != 2:
            violations.append("bath.j0 and bath.cutoff must be given together")
        if gas and len(gas) != len(GAS_KEYS):
            violations.append(f"gas block needs {', '.join(GAS_KEYS)}")
        if solvent and len(solvent) != len(SOLVENT_KEYS):
            violations.append(f"solvent block needs {', '.join(SOLVENT_KEYS)}")
        if not blocks:
            violations.append(f"bath.kind = {kind} needs j0/cutoff or a microscopic block")

    if has('molecule.omega') and has('molecule.delta_local'):
        violations.append("give either molecule.delta_local or molecule.omega + molecule.eta")
    if has('molecule.eta') and has('molecule.delta_local'):
        violations.append("give either molecule.delta_local or molecule.eta")
    if has('molecule.omega') and not has('molecule.eta'):
        violations.append("molecule.omega needs molecule.eta")

    t_min, t_max = values.get('time.t_min'), values.get('time.t_max')
    if t_min is not None and t_max is not None:
        if t_min < 0:
            violations.append("time.t_min must be non-negative")
        if not t_max > t_min:
            violations.append("time.t_max must exceed time.t_min")
        if values.get('time.spacing') == 'log' and t_min <= 0:
            violations.append("log spacing needs time.t_min > 0")
    if values.get('time.points', 2) < 2:
        violations.append("time.points must be at least 2")
    columns = [name.strip() for name in str(values.get('run.columns', '')).split(',')]
    unknown = [name for name in columns if name not in ALL_COLUMNS]
    if unknown:
        violations.append(f"unknown columns {unknown}; choose from {', '.join(ALL_COLUMNS)}")
    tolerance = values.get('run.tolerance', 1e-6)
    if not 1e-12 < tolerance < 1e-2:
        violations.append("run.tolerance must lie in (1e-12, 1e-2)")
    return violations


@dataclass(frozen=True)
class TimeGrid:
    t_min: float
    t_max: float
    points: int
    spacing: str = 'linear'

    def values(self) -> np.ndarray:
        if self.spacing == 'log':
            return np.geomspace(self.t_min, self.t_max, self.points)
        return np.linspace(self.t_min, self.t_max, self.points)


@dataclass(frozen=True)
class OracleSettings:
    modes: int = 200
    omega_max: Optional[float] = None
    scheme: str = 'linear'
    threshold: float = 0.01
    truncation_bound: float = 1e-3


@dataclass
class ScenarioConfig:
    """Resolved scenario; `values` keeps the flat document with defaults filled"""
    molecule: MoleculeParams
    bath: SpectralDensity
    units: UnitSystem
    times: TimeGrid
    path: str
    tolerance: float
    columns: Tuple[str, ...]
    initial_state: str = 'L'
    output: Optional[str] = None
    oracle: OracleSettings = field(default_factory=OracleSettings)
    values: Dict[str, Any] = field(default_factory=dict)
    explicit: Tuple[str, ...] = ()
    base_dir: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = dict(sorted(self.values.items()))
        data['molecule.resolved_delta_tunnel'] = self.molecule.tunneling
        data['molecule.resolved_delta_local'] = self.molecule.localization
        data['molecule.resolved_hbar'] = self.molecule.reduced_planck
        for key, value in self.bath.describe().items():
            data[f'bath.resolved.{key}'] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[str] = None) -> 'ScenarioConfig':
        """Build from flat keys; keys starting with a resolved marker are ignored"""
        document = {key: value for key, value in data.items() if '.resolved' not in key}
        values, violations = _validate_values(document)
        violations += _check_consistency(values, list(document))
        if violations:
            raise ConfigError(violations)
        return _resolve(values, tuple(document), base_dir)

    def with_values(self, **overrides: Any) -> 'ScenarioConfig':
        """Copy with flat keys replaced, e.g. with_values(**{'bath.j0': 1e-3})"""
        document = {key: self.values[key] for key in self.explicit}
        document.update(overrides)
        return ScenarioConfig.from_dict(document, self.base_dir)


def _resolve(values: Dict[str, Any], explicit: Tuple[str, ...], base_dir: Optional[str]) -> ScenarioConfig:
    try:
        units = UnitSystem(values['units.mass'], values['units.energy'], values['units.length'])
        molecule = _resolve_molecule(values, explicit, units)
        bath = _resolve_bath(values, units, base_dir)
    except (ParameterError, OSError) as exc:
        raise ConfigError([str(exc)])
    times = TimeGrid(values['time.t_min'], values['time.t_max'], values['time.points'],
                     values['time.spacing'])
    oracle = OracleSettings(values['oracle.modes'], values.get('oracle.omega_max'),
                            values['oracle.scheme'], values['oracle.threshold'],
                            values['oracle.truncation_bound'])
    columns = tuple(name.strip() for name in values['run.columns'].split(','))
    return ScenarioConfig(molecule, bath, units, times, values['run.path'], values['run.tolerance'],
                          columns, values['molecule.initial_state'], values.get('run.output'), oracle,
                          values, explicit, base_dir)


def _resolve_molecule(values: Dict[str, Any], explicit: Tuple[str, ...], units: UnitSystem) -> MoleculeParams:
    if 'molecule.omega' in explicit:
        return derive_two_level(values['molecule.omega'], values['molecule.eta'], units,
                                temperature=values['units.temperature'])
    # without a well frequency the asymmetry stands in for delta directly
    localization = values.get('molecule.eta', values.get('molecule.delta_local', 0.0))
    return MoleculeParams(values['molecule.delta_tunnel'], localization, values['molecule.hbar'])


def _resolve_bath(values: Dict[str, Any], units: UnitSystem, base_dir: Optional[str]) -> SpectralDensity:
    kind = values['bath.kind']
    if kind == 'none':
        return SpectralDensity.zero()
    if kind == 'tabulated':
        path = values['bath.table']
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return SpectralDensity.from_table(path)
    if 'bath.j0' in values:
        build = SpectralDensity.gas if kind == 'subohmic' else SpectralDensity.debye
        return build(values['bath.j0'], values['bath.cutoff'])
    if kind == 'subohmic':
        gas = GasMicroParams(values['bath.gas.density'], values['bath.gas.thermal_energy'],
                             values['bath.gas.range'], values['molecule.hbar'])
        return gas_density_from_micro(gas, values.get('bath.gas.measure', 'radial'))
    solvent = DebyeSolventParams(values['bath.solvent.dipole_change'], values['bath.solvent.radius'],
                                 values['bath.solvent.eps_static'], values['bath.solvent.eps_inf'],
                                 values['bath.solvent.debye_time'])
    return debye_density(solvent, units, values.get('bath.solvent.rule', 'onsager'))


def read_document(text: str) -> Dict[str, str]:
    """Split a flat document into raw key/value strings"""
    data, violations = {}, []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split(' #', 1)[0].strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            violations.append(f"line {number}: expected 'key = value'")
            continue
        key, value = (part.strip() for part in line.split('=', 1))
        if key in data:
            violations.append(f"line {number}: duplicate key '{key}'")
        data[key] = value
    if violations:
        raise ConfigError(violations)
    return data


def parse_config(text: str, base_dir: Optional[str] = None) -> ScenarioConfig:
    """
    Parse and validate a scenario document.

    Raises:
        ConfigError: listing every violation found
    """
    return ScenarioConfig.from_dict(read_document(text), base_dir)


def load_config(path: str) -> ScenarioConfig:
    with open(path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    config = parse_config(text, os.path.dirname(os.path.abspath(path)))
    logger.info("loaded %s: path=%s, bath=%s", path, config.path, config.bath.kind)
    return config


@dataclass
class SweepSpec:
    """One swept parameter over a base document that leaves it unset"""
    parameter: str
    values: Tuple[float, ...]
    base: Dict[str, Any]
    base_dir: Optional[str] = None

    def __post_init__(self):
        violations = []
        if self.parameter not in SWEEP_KEYS:
            violations.append(f"unknown sweep parameter '{self.parameter}'; "
                              f"choose from {', '.join(SWEEP_KEYS)}")
        elif SWEEP_KEYS[self.parameter] in self.base:
            violations.append(f"swept parameter '{SWEEP_KEYS[self.parameter]}' is also fixed")
        if not self.values:
            violations.append("sweep value list is empty")
        if violations:
            raise ConfigError(violations)
        self.values = tuple(float(value) for value in self.values)
        self.config_for(self.values[0])

    @property
    def key(self) -> str:
        return SWEEP_KEYS[self.parameter]

    def config_for(self, value: float) -> ScenarioConfig:
        document = dict(self.base)
        document[self.key] = value
        if self.parameter == 'j0' and 'bath.cutoff' not in document:
            raise ConfigError(["a j0 sweep needs bath.cutoff"])
        if self.parameter == 'cutoff' and 'bath.j0' not in document:
            raise ConfigError(["a cutoff sweep needs bath.j0"])
        return ScenarioConfig.from_dict(document, self.base_dir)


def parse_sweep(text: str, parameter: str, values: Sequence[float],
                base_dir: Optional[str] = None) -> SweepSpec:
    return SweepSpec(parameter, tuple(values), read_document(text), base_dir)
