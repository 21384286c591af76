# SPDX-License-Identifier: Apache-2.0
"""EV fleet charging scheduler: drift-plus-penalty with buffered averaging,
greedy / MPC / offline baselines, flow disaggregation and bound audits."""

from ._core import *  # noqa: F401,F403
from ._core import Error, InputError, StateError, ConfigError, InfeasibleError  # noqa: F401

__version__ = "0.1.0"
