from functools import lru_cache
from importlib import resources
import tomllib
from typing import Any

from .constants import DEFAULTS_FILENAME, DEFAULTS_PACKAGE


@lru_cache(maxsize=1)
def load_raw_defaults() -> dict[str, Any]:
    """Load the bundled defaults TOML file as a dictionary."""
    try:
        defaults_path = resources.files(DEFAULTS_PACKAGE).joinpath(DEFAULTS_FILENAME)
        with defaults_path.open('rb') as fp:
            loaded = tomllib.load(fp)
        return loaded if isinstance(loaded, dict) else {}
    except (FileNotFoundError, tomllib.TOMLDecodeError, OSError):
        return {}


@lru_cache(maxsize=None)
def default(section: str, key: str) -> Any:
    """Return one bundled default, raising KeyError when the file does not define it."""
    table = load_raw_defaults().get(section) or {}
    if key not in table:
        raise KeyError(f'No bundled default for [{section}] {key}')
    return table[key]
