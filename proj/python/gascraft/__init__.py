# Copyright 2026 The Gascraft Authors
# SPDX-License-Identifier: Apache-2.0
"""Assembles gas-efficient settlement contracts from derivative term sheets.

Thin wrapper over the compiled core: functions that cross the boundary
exchange JSON strings; this module parses them into plain Python objects.
"""

import json as _json

from . import _core
from ._core import GascraftError, gas_model_version, model_version

__version__ = _core.__version__

__all__ = [
    "GascraftError",
    "Workspace",
    "brute_force",
    "eval_policy",
    "gas_model_version",
    "gen_data",
    "generate_instances",
    "model_version",
    "normalized_gas_score",
    "reward_phase1",
    "reward_phase2",
    "train",
    "write_report",
]


class Workspace:
    """Loaded snippet library, blueprints, and schemas with the builtin evaluator."""

    def __init__(self, library_path, blueprint_path, schema_dir):
        self._ws = _core.Workspace(str(library_path), str(blueprint_path), str(schema_dir))

    def contract_types(self):
        return self._ws.contract_types()

    def symbols(self):
        return self._ws.symbols()

    def action_shape(self):
        return self._ws.action_shape()

    def library_hash(self):
        return self._ws.library_hash()

    def assemble_contract(self, instance, selection):
        """Render one selection; returns {contract_name, source, constructor_params}."""
        return _json.loads(self._ws.assemble_contract(_dump(instance), list(selection)))

    def evaluate_selection(self, instance, selection):
        """Assemble and score one selection; returns the full evaluation report."""
        return _json.loads(self._ws.evaluate_selection(_dump(instance), list(selection)))

    def expected_settlement(self, instance, rule_id):
        """Oracle balance deltas for one settlement rule, as {party: int}."""
        deltas = _json.loads(self._ws.expected_settlement(_dump(instance), rule_id))
        return {party: int(amount) for party, amount in deltas.items()}

    def settlement_rules(self, type_name):
        return _json.loads(self._ws.settlement_rules(type_name))


def _dump(instance):
    return instance if isinstance(instance, str) else _json.dumps(instance)


def generate_instances(schema_dir, type_name, count, seed):
    return _json.loads(_core.generate_instances(str(schema_dir), type_name, count, seed))


def reward_phase1(report):
    return _core.reward_phase1(_dump(report))


def reward_phase2(report):
    return _core.reward_phase2(_dump(report))


def normalized_gas_score(report):
    return _core.normalized_gas_score(_dump(report))


def gen_data(config_path, seed):
    _core.gen_data(str(config_path), seed)


def train(config_path, seed, resume=""):
    return _json.loads(_core.train(str(config_path), seed, str(resume)))


def eval_policy(config_path, baseline="", checkpoint="", emit_dir=""):
    return _json.loads(
        _core.eval_policy(str(config_path), str(baseline), str(checkpoint), str(emit_dir))
    )


def brute_force(config_path, max_instances):
    return _json.loads(_core.brute_force(str(config_path), max_instances))


def write_report(config_path):
    _core.write_report(str(config_path))
