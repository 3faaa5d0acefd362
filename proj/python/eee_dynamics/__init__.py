# Copyright 2026 The eee-dynamics Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Learning dynamics for weakly coupled stochastic games.

Profiles (strategies, models, Q-tables) are lists with one numpy array per
agent, shaped (|Z|, |X|, k).
"""

from ._core import (
    ChainError,
    ConfigurationError,
    DomainError,
    EeeError,
    Game,
    IoError,
    StructuralError,
    bounds,
    consistent_model,
    constant_strategy,
    coupling,
    example1,
    load_game,
    meyer_kappa,
    run,
    simulate,
    stationary,
    verify,
)

__all__ = [
    "ChainError",
    "ConfigurationError",
    "DomainError",
    "EeeError",
    "Game",
    "IoError",
    "StructuralError",
    "bounds",
    "consistent_model",
    "constant_strategy",
    "coupling",
    "example1",
    "load_game",
    "meyer_kappa",
    "run",
    "simulate",
    "stationary",
    "verify",
]

__version__ = "0.1.0"
