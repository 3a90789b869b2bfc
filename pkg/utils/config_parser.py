"""
Experiment config parsing utilities
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from .exceptions import ConfigError
from .validators import validate_experiment_config


@dataclass
class ConfigEntry:
    """Represents a single `key = value` line of a config file"""
    section: str
    key: str
    value: object
    filename: str
    line_number: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment: potential, task, optional initial state, numerics and output"""
    task: str
    task_params: Dict = field(default_factory=dict)
    variant: Optional[str] = None
    potential_params: Dict = field(default_factory=dict)
    initial_kind: Optional[str] = None
    initial_params: Dict = field(default_factory=dict)
    numerics: Dict = field(default_factory=dict)
    output_dir: str = "results"
    formats: Tuple[str, ...] = ('csv', 'json')
    source: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            'task': {'name': self.task, **self.task_params},
            'potential': {'variant': self.variant, **self.potential_params} if self.variant else None,
            'initial_state': ({'kind': self.initial_kind, **self.initial_params}
                              if self.initial_kind else None),
            'numerics': dict(self.numerics),
            'output': {'directory': self.output_dir, 'formats': list(self.formats)},
            'source': self.source,
        }


class ConfigFileParser:
    """Parser for sectioned experiment config files"""

    def __init__(self):
        self.patterns = {
            # [section]
            'section': r'^\[\s*([A-Za-z_]\w*)\s*\]$',
            # key = value
            'entry': r'^([A-Za-z_]\w*)\s*=\s*(.*?)$',
        }

        # Value coercions, tried in order
        self.value_patterns = [
            ('int', r'^[+-]?\d+$'),
            ('float', r'^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$'),
            ('none', r'^(none|null)$'),
        ]

    def _coerce(self, text: str):
        """Turn a raw value into int, float, None or a stripped string"""
        for kind, pattern in self.value_patterns:
            if re.match(pattern, text, re.IGNORECASE):
                if kind == 'int':
                    return int(text)
                if kind == 'float':
                    return float(text)
                return None
        return text

    def parse_line(self, line: str, line_number: int, filename: str,
                   section: Optional[str]) -> Tuple[Optional[str], Optional[ConfigEntry]]:
        """Parse one line; returns (new section or None, entry or None)"""
        line = line.split('#', 1)[0].strip()
        if not line:
            return None, None

        match = re.match(self.patterns['section'], line)
        if match:
            return match.group(1).lower(), None

        match = re.match(self.patterns['entry'], line)
        if not match:
            raise ConfigError(f"{filename}:{line_number}: cannot parse line '{line}'")
        if section is None:
            raise ConfigError(f"{filename}:{line_number}: '{match.group(1)}' appears before any [section]")
        return None, ConfigEntry(section, match.group(1).lower(), self._coerce(match.group(2).strip()),
                                 filename, line_number)

    def parse_file(self, content: str, filename: str) -> Dict[str, Dict]:
        """Parse an entire config into {section: {key: value}}"""
        sections: Dict[str, Dict] = {}
        current = None
        for line_number, line in enumerate(content.split('\n'), 1):
            new_section, entry = self.parse_line(line, line_number, filename, current)
            if new_section is not None:
                if new_section in sections:
                    raise ConfigError(f"{filename}:{line_number}: section [{new_section}] appears twice")
                sections[new_section] = {}
                current = new_section
                continue
            if entry is None:
                continue
            if entry.key in sections[entry.section]:
                raise ConfigError(f"{filename}:{line_number}: duplicate key", f"{entry.section}.{entry.key}")
            sections[entry.section][entry.key] = entry.value
        return sections

    def build_config(self, sections: Dict[str, Dict], filename: Optional[str] = None) -> ExperimentConfig:
        """Validate parsed sections and freeze them into an ExperimentConfig"""
        is_valid, errors = validate_experiment_config(sections)
        if not is_valid:
            raise ConfigError("; ".join(errors))

        task = dict(sections['task'])
        name = task.pop('name')
        # `none` reads as None; dropping it leaves the dataclass default
        potential = {k: v for k, v in sections.get('potential', {}).items() if v is not None}
        variant = potential.pop('variant', None)
        initial = dict(sections.get('initial_state', {}))
        kind = initial.pop('kind', None)
        output = sections.get('output', {})
        formats = output.get('formats', 'csv, json')
        return ExperimentConfig(
            task=name,
            task_params=task,
            variant=variant,
            potential_params=potential,
            initial_kind=kind,
            initial_params=initial,
            numerics=dict(sections.get('numerics', {})),
            output_dir=str(output.get('directory', 'results')),
            formats=tuple(f.strip() for f in str(formats).split(',') if f.strip()),
            source=filename,
        )

    def get_config_summary(self, config: ExperimentConfig) -> Dict:
        """Short description of a config for progress output"""
        return {
            'task': config.task,
            'potential': config.variant,
            'initial_state': config.initial_kind,
            'numerics_overrides': sorted(config.numerics),
            'formats': list(config.formats),
            'filename': config.source,
        }


def parse_config_text(content: str, filename: str = "<config>") -> Tuple[ExperimentConfig, Dict]:
    """
    Convenience function to parse config text
    Returns (config, summary)
    """
    parser = ConfigFileParser()
    config = parser.build_config(parser.parse_file(content, filename), filename)
    return config, parser.get_config_summary(config)


def load_config(path: str) -> Tuple[ExperimentConfig, Dict]:
    """Read and parse a config file from disk"""
    config_path = Path(path)
    try:
        content = config_path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    return parse_config_text(content, str(config_path))


def config_from_sections(sections: Dict[str, Dict], source: Optional[str] = None) -> ExperimentConfig:
    """Build a config directly from section dicts (used by the preset registry)"""
    return ConfigFileParser().build_config(sections, source)

