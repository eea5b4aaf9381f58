"""Successive-halving hyperparameter search for knowledge-graph embeddings."""

from ._grash import *  # noqa: F401,F403
from ._grash import __doc__  # noqa: F401
