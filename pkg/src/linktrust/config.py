"""Flat ``key = value`` configuration files.

Keys are ``PopulationConfig`` / ``ClassifierSpec`` field names. Per-class
values use a dotted suffix, one of ``genuine``, ``fake``, ``genuine_restricted``:

    n_users = 300
    fake_fraction = 0.087
    means.common_friends.fake = 1.44
    private_profile_prob.genuine = 0.0981
    dispersion.common_chat_messages = none
    min_leaf = 6
"""

from __future__ import annotations

from dataclasses import fields
from typing import TextIO

from .classifiers import ClassifierSpec
from .errors import InvalidConfig
from .synth import CLASS_NAMES, PopulationConfig


def read_flat(source: TextIO) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InvalidConfig(f"line {lineno}: empty key")
        values[key] = value
    return values


def _number(key, value, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise InvalidConfig(f"{key}: expected {kind.__name__}, got {value!r}") from None


def population_config(values: dict[str, str]) -> PopulationConfig:
    cfg = PopulationConfig()
    scalar = {f.name: f for f in fields(PopulationConfig)}
    for key, value in values.items():
        parts = key.split(".")
        if len(parts) == 1 and key in scalar and key not in (
                "means", "private_profile_prob", "family_prob", "dispersion"):
            kind = int if key in ("n_users", "seed") else float
            setattr(cfg, key, _number(key, value, kind))
        elif parts[0] == "means" and len(parts) == 3:
            feature, cls = parts[1], parts[2]
            if feature not in cfg.means or cls not in CLASS_NAMES:
                raise InvalidConfig(f"unknown key {key}")
            row = list(cfg.means[feature])
            row[CLASS_NAMES.index(cls)] = _number(key, value)
            cfg.means[feature] = tuple(row)
        elif parts[0] in ("private_profile_prob", "family_prob") and len(parts) == 2:
            if parts[1] not in CLASS_NAMES:
                raise InvalidConfig(f"unknown class in {key}")
            row = list(getattr(cfg, parts[0]))
            row[CLASS_NAMES.index(parts[1])] = _number(key, value)
            setattr(cfg, parts[0], tuple(row))
        elif parts[0] == "dispersion" and len(parts) == 2:
            if parts[1] not in cfg.dispersion:
                raise InvalidConfig(f"unknown feature in {key}")
            cfg.dispersion[parts[1]] = None if value.lower() == "none" else _number(key, value)
        elif key in {f.name for f in fields(ClassifierSpec)}:
            continue
        else:
            raise InvalidConfig(f"unknown key {key}")
    cfg.validate()
    return cfg


def classifier_spec(values: dict[str, str], **overrides) -> ClassifierSpec:
    kwargs = {}
    for f in fields(ClassifierSpec):
        if f.name in values:
            kwargs[f.name] = values[f.name] if f.name == "family" else _number(f.name, values[f.name], int)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ClassifierSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from None
