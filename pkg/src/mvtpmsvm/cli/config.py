"""
Command settings: flags override the JSON config file, which overrides defaults.
"""

import argparse
import json
import logging

from mvtpmsvm.exceptions import DataParseError

log = logging.getLogger(__name__)


def load_config(path: str) -> dict:
    """
    Read a flat JSON object whose keys are long flag names with ``-`` replaced by ``_``.

    Raises:
        DataParseError: If the file is not a JSON object.
    """
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as ex:
            raise DataParseError(f"Config {path} is not valid JSON: {ex}") from ex
    if not isinstance(payload, dict):
        raise DataParseError(f"Config {path} must hold a JSON object")
    return payload


def resolve_settings(args: argparse.Namespace, config: dict, defaults: dict) -> dict:
    """
    Merge the settings of one command.

    Args:
        args (argparse.Namespace): Parsed flags; unset flags are ``None`` or ``[]``.
        config (dict): Values from the config file.
        defaults (dict): Every setting of the command with its default.

    Returns:
        dict: One value per key of ``defaults``.
    """
    unknown = sorted(set(config) - set(defaults))
    if unknown:
        log.warning("Ignoring config keys not used by this command: %s", ", ".join(unknown))
    settings = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        # empty positional lists count as unset
        if flag is not None and flag != []:
            settings[key] = flag
        elif key in config:
            settings[key] = config[key]
        else:
            settings[key] = default
    return settings
