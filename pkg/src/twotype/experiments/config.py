"""YAML experiment configs.

A config file maps one-to-one onto :class:`~twotype.experiments.harness.ExperimentSpec`::

    name: phase-transition
    kind: PHASE_TRANSITION
    trials: 40
    seed: 0
    algorithms: [TE, MV]
    pipeline:
      split_mode: reuse_all
      detection: always
    params:
      n: 50
      d: 200
      angles_deg: [30, 60, 90, 120, 150]

Unknown top-level keys are rejected so that typos do not silently fall back to
defaults.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .harness import ExperimentSpec

__all__ = ["load_spec", "spec_from_mapping"]

_TOP_LEVEL = {"name", "kind", "trials", "seed", "algorithms", "pipeline", "params"}


def spec_from_mapping(cfg: dict, base_dir: Path | None = None) -> ExperimentSpec:
    if not isinstance(cfg, dict):
        raise ValueError("config must be a mapping")
    extra = set(cfg) - _TOP_LEVEL
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    if "kind" not in cfg:
        raise ValueError("config needs a 'kind'")
    params = dict(cfg.get("params") or {})
    # dataset paths are relative to the config file
    if base_dir is not None:
        for key in ("responses", "truth"):
            if key in params and not Path(params[key]).is_absolute():
                params[key] = str(base_dir / params[key])
    return ExperimentSpec(
        kind=str(cfg["kind"]).upper(),
        trials=int(cfg.get("trials", 1)),
        seed=int(cfg.get("seed", 0)),
        name=str(cfg.get("name", "experiment")),
        algorithms=tuple(cfg.get("algorithms", ["TE"])),
        pipeline=dict(cfg.get("pipeline") or {}),
        params=params,
    )


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    return spec_from_mapping(cfg, base_dir=path.parent)
