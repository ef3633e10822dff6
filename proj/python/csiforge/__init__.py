# SPDX-License-Identifier: Apache-2.0
"""MIMO-OFDM CSI simulation, classical estimators, datasets and tokenization."""

from ._core import *  # noqa: F401,F403
from ._core import ShardError, __doc__  # noqa: F401

__version__ = "0.1.0"
