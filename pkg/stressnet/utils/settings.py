"""
Configuration utilities.

Settings are stored in a dictionary-like configuration object.
All settings are modifiable by environment variables that encode
the path in the dictionary tree.

Inner nodes in the dictionary tree can be any dictionary.
A leaf node in the dictionary tree is represented by an inner node that
contains a default key.

Configuration files are plain text: one ``dotted.key = value`` per line,
``#`` starts a comment. Values are YAML scalars or flow sequences.
"""
import logging
import os
import sys
import typing as tp
import warnings

import yaml
from plumbum import LocalPath

from stressnet import errors

LOG = logging.getLogger(__name__)

try:
    from importlib.metadata import PackageNotFoundError, version
    __version__ = version("stressnet")
except (ImportError, PackageNotFoundError):
    __version__ = "unknown"


def current_available_threads() -> int:
    """Returns the number of currently available threads."""
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def get_number_of_jobs(config: 'Configuration') -> int:
    """Returns the number of jobs set in the config, 0 meaning all."""
    jobs_configured = int(config["jobs"])
    if jobs_configured <= 0:
        return current_available_threads()
    return jobs_configured


class InvalidConfigKey(RuntimeWarning):
    """Warn, if you access a non-existing key of the configuration."""


def escape_yaml(raw_str: str) -> str:
    """
    Shell-Escape a yaml input string.

    Args:
        raw_str: The unescaped string.

    Examples:
        >>> escape_yaml('[8, 16, 32]')
        '"[8, 16, 32]"'
    """
    escape_list = [char for char in raw_str if char in ['!', '{', '[']]
    if len(escape_list) == 0:
        return raw_str

    str_quotes = '"'
    i_str_quotes = "'"
    if str_quotes in raw_str and str_quotes not in raw_str[1:-1]:
        return raw_str

    if str_quotes in raw_str[1:-1]:
        raw_str = i_str_quotes + raw_str + i_str_quotes
    else:
        raw_str = str_quotes + raw_str + str_quotes
    return raw_str


class ConfigLoader(yaml.SafeLoader):
    """Avoid polluting yaml's namespace with our modifications."""


class ConfigDumper(yaml.SafeDumper):
    """Avoid polluting yaml's namespace with our modifications."""


def to_yaml(value: tp.Any) -> tp.Optional[str]:
    """
    Convert a given value to a YAML string.

    Examples:
        >>> to_yaml([8, 16, 32])
        '[8, 16, 32]'
        >>> to_yaml(None)
        'null'
    """
    stream = yaml.io.StringIO()
    dumper = ConfigDumper(stream, default_flow_style=True, width=sys.maxsize)
    val = None
    try:
        dumper.open()
        dumper.represent(value)
        val = str(stream.getvalue()).strip()
        dumper.close()
    finally:
        dumper.dispose()

    if val is not None and val.endswith('\n...'):
        val = val[:-4].strip()
    elif val is not None and val.endswith('...'):
        val = val[:-3].strip()
    return val


def from_yaml(raw: str) -> tp.Any:
    """
    Parse one YAML scalar or flow sequence.

    Examples:
        >>> from_yaml('0.5'), from_yaml('true'), from_yaml('[8, 16]')
        (0.5, True, [8, 16])
    """
    try:
        return yaml.load(str(raw), Loader=ConfigLoader)
    except yaml.YAMLError:
        return raw


def to_env_var(env_var: str, value: tp.Any) -> str:
    """
    Create an environment variable from a name and a value.

    This generates a shell-compatible representation of an
    environment variable that is assigned a YAML representation of
    a value.

    Args:
        env_var (str): Name of the environment variable.
        value (Any): A value we convert from.
    """
    val = to_yaml(value)
    ret_val = "%s=%s" % (env_var, escape_yaml(str(val)))
    return ret_val


def coerce(key: str, default: tp.Any, value: tp.Any) -> tp.Any:
    """
    Type-check `value` against the registered default of `key`.

    Integers are accepted where floats are expected; a `None` default
    accepts anything.

    Examples:
        >>> coerce('emission.sigma_spatial', 3.0, 3)
        3.0
    """
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, list):
        if isinstance(value, list):
            return value
    elif isinstance(default, str):
        return str(value)
    else:
        return value
    raise errors.ConfigError(
        f'{key}: expected a value like {default!r}, got {value!r}'
    )


InnerNode = tp.Dict[str, tp.Any]


class Configuration:
    """
    Dictionary-like data structure to contain all configuration variables.

    Whenever the structure is updated with a new subtree, all variables
    defined in the new subtree are updated from the environment.

    Environment variables are generated from the tree paths automatically.
        CFG["seed"] becomes STRESSNET_SEED
        CFG["emission"]["sigma_spatial"] becomes
        STRESSNET_EMISSION_SIGMA_SPATIAL
    """

    def __init__(
        self,
        parent_key: str,
        node: tp.Optional[InnerNode] = None,
        parent: tp.Optional['Configuration'] = None,
        init: bool = True
    ):
        self.parent = parent
        self.parent_key = parent_key
        self.node = node if node is not None else {}
        if init:
            self.init_from_env()

    def has_value(self) -> bool:
        """Check, if the node contains a 'value'."""
        return isinstance(self.node, dict) and 'value' in self.node

    def has_default(self) -> bool:
        """Check, if the node contains a 'default' value."""
        return isinstance(self.node, dict) and 'default' in self.node

    def is_leaf(self) -> bool:
        """Check, if the node is a 'leaf' node."""
        return self.has_value() or self.has_default()

    def init_from_env(self) -> None:
        """
        Initialize this node from environment.

        If we're a leaf node, i.e., a node containing a dictionary that
        consist of a 'default' key, compute our env variable and initialize
        our value from the environment.
        Otherwise, init our children.
        """
        if 'default' in self.node:
            env_var = self.__to_env_var__().upper()
            if self.has_value():
                env_val = self.node['value']
                fallback = to_yaml(env_val)
            else:
                fallback = to_yaml(self.node['default'])
            raw = os.getenv(env_var)
            if raw is None:
                self.node['value'] = from_yaml(str(fallback))
            else:
                self.node['value'] = coerce(
                    env_var, self.node['default'], from_yaml(raw)
                )
        else:
            if isinstance(self.node, dict):
                for k in self.node:
                    self[k].init_from_env()

    def reset(self) -> None:
        """Drop all values, falling back to the registered defaults."""
        if self.has_default():
            self.node.pop('value', None)
        elif isinstance(self.node, dict):
            for k in self.node:
                self[k].reset()

    @property
    def value(self) -> tp.Any:
        """Return the node value, if we're a leaf node."""
        if 'value' in self.node:
            return self.node['value']
        if 'default' in self.node:
            return self.node['default']
        return self

    def leaf(self, dotted_key: str) -> 'Configuration':
        """
        Look up a leaf by its dotted path.

        Raises:
            ConfigError: if no such leaf is registered.
        """
        node = self
        for part in dotted_key.split('.'):
            if not isinstance(node.node, dict) or part not in node.node or \
                    part in ('desc', 'default', 'value'):
                raise errors.ConfigError(f'unknown config key {dotted_key!r}')
            node = node[part]
        if not node.has_default():
            raise errors.ConfigError(f'{dotted_key!r} is not a setting')
        return node

    def set_dotted(self, dotted_key: str, raw: tp.Any) -> None:
        """Assign a value given as YAML text (or already parsed)."""
        leaf = self.leaf(dotted_key)
        value = from_yaml(raw) if isinstance(raw, str) else raw
        leaf.node['value'] = coerce(dotted_key, leaf.node['default'], value)

    def load(self, _from: tp.Union[str, LocalPath]) -> None:
        """
        Load ``key = value`` lines from a file.

        Raises:
            ConfigError: on unknown keys or malformed lines.
        """
        with open(str(_from), 'r') as infile:
            for lineno, line in enumerate(infile, start=1):
                text = line.split('#', 1)[0].strip()
                if not text:
                    continue
                key, sep, raw = text.partition('=')
                if not sep or not key.strip():
                    raise errors.ConfigError(
                        f'{_from}:{lineno}: expected "key = value"'
                    )
                self.set_dotted(key.strip(), raw.strip())
        LOG.debug("loaded configuration from %s", _from)

    def dotted_items(self, prefix: str = '') -> tp.List[tp.Tuple[str, tp.Any]]:
        """All leaves as (dotted key, value), in registration order."""
        if self.has_default():
            return [(prefix, self.value)]
        items: tp.List[tp.Tuple[str, tp.Any]] = []
        for k in self.node:
            key = f'{prefix}.{k}' if prefix else k
            items.extend(self[k].dotted_items(key))
        return items

    def store(self, config_file: tp.Union[str, LocalPath]) -> None:
        """Store the configuration in the ``key = value`` format."""
        with open(str(config_file), 'w') as outf:
            for key, value in self.dotted_items():
                desc = self.leaf(key).node.get('desc')
                if desc:
                    outf.write(f'# {desc}\n')
                outf.write(f'{key} = {to_yaml(value)}\n')

    def __getitem__(self, key: str) -> 'Configuration':
        if key not in self.node:
            warnings.warn(
                "Access to non-existing config element: {0}".format(key),
                category=InvalidConfigKey,
                stacklevel=2
            )
            return Configuration(key, init=False)
        return Configuration(key, parent=self, node=self.node[key], init=False)

    def __setitem__(self, key: str, val: tp.Any) -> None:
        if key in self.node:
            self.node[key]['value'] = val
        else:
            if isinstance(val, dict):
                self.node[key] = val
            else:
                self.node[key] = {'value': val}

    def __int__(self) -> int:
        """Convert the node's value to int, if available."""
        if not self.is_leaf():
            raise ValueError(
                'Inner configuration nodes cannot be converted to int.'
            )
        return int(self.value)

    def __float__(self) -> float:
        if not self.is_leaf():
            raise ValueError(
                'Inner configuration nodes cannot be converted to float.'
            )
        return float(self.value)

    def __bool__(self) -> bool:
        """Convert the node's value to bool, if available."""
        if not self.is_leaf():
            return True
        return bool(self.value)

    def __contains__(self, key: str) -> bool:
        return key in self.node

    def __str__(self) -> str:
        if self.is_leaf():
            return str(self.value)
        return str(self.node)

    def __repr__(self) -> str:
        """
        Represents the configuration as a list of environment variables.
        """
        _repr = []

        if self.is_leaf():
            return to_env_var(self.__to_env_var__(), self.value)

        for k in self.node:
            _repr.append(repr(self[k]))

        return "\n".join(sorted(_repr))

    def __to_env_var__(self) -> str:
        parent_key = self.parent_key
        if self.parent:
            return str(self.parent.__to_env_var__() + "_" + parent_key).upper()
        return parent_key.upper()


def setup_config(
    cfg: Configuration,
    config_file: tp.Optional[str] = None,
    env_var_name: str = "STRESSNET_CONFIG"
) -> None:
    """
    This will initialize the given configuration object.

    The following resources are applied in order:
        1) Default settings.
        2) Config file (`config_file`, else the file named by
           `env_var_name`).
        3) Environment variables of the individual settings.

    Args:
        config_file: explicit config file, replaces the env-var file
        env_var_name: name of the environment variable holding the config path
    """
    cfg.reset()
    config_path = config_file or os.getenv(env_var_name, None)
    if config_path:
        cfg.load(config_path)
    cfg.init_from_env()
