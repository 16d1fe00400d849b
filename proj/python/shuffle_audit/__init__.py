# Copyright 2026 The shuffle-audit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Shuffle attacks on Shapley explanations and their detection."""

import json

import numpy as np

from . import _core
from ._core import (CapabilityError, Error, InvalidArgument, IoError,
                    NumericError, ParseError, SchemaError, audit_names,
                    kernel_weight, run_audit, synth_dataset)

__version__ = _core.__version__


def _dump(obj):
    if obj is None or obj == "":
        return ""
    return obj if isinstance(obj, str) else json.dumps(obj)


def attack_scores(scores, privileged, spec, seed=0,
                  direction="higher_is_superior"):
    """Shuffles one batch of scores; spec is a dict or JSON text."""
    out = _core.attack_scores(list(map(float, scores)),
                              [int(bool(g)) for g in privileged],
                              _dump(spec), seed, direction)
    return np.asarray(out)


def score(model, columns, rows, attack=None, protected=(), seed=0,
          direction="higher_is_superior"):
    """f(X), or f'(X) when an attack spec is given."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    return np.asarray(_core.score(_dump(model), list(columns), rows,
                                  _dump(attack), list(protected), seed,
                                  direction))


def explain(model, columns, rows, background, method="kernel",
            batching="mega_batch", max_coalitions=4096, attack=None,
            protected=(), seed=0, direction="higher_is_superior"):
    """Attributions for every row: dict with phi (N x d), base, features."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    background = np.ascontiguousarray(background, dtype=np.float64)
    out = _core.explain(_dump(model), list(columns), rows, background, method,
                        batching, max_coalitions, _dump(attack),
                        list(protected), seed, direction)
    out["base"] = np.asarray(out["base"])
    return out


def fairness_metrics(y_true, y_pred, privileged):
    return json.loads(_core.fairness_metrics(
        [int(v) for v in y_true], [int(v) for v in y_pred],
        [int(bool(g)) for g in privileged]))


def fairness_drop(y_true, y_pred, y_pred_adv, privileged):
    return json.loads(_core.fairness_drop(
        [int(v) for v in y_true], [int(v) for v in y_pred],
        [int(v) for v in y_pred_adv], [int(bool(g)) for g in privileged]))


def run_sweep(spec):
    return json.loads(_core.run_sweep(_dump(spec)))
