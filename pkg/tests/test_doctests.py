"""Run the examples embedded in module docstrings."""

import doctest
import importlib

import pytest

MODULES = ["curvnet.surface", "curvnet.star", "curvnet.curvature", "curvnet.verify", "curvnet.netgen.net",
           "curvnet.netgen.revolution", "curvnet.netgen.tracing", "curvnet.netgen.traced", "curvnet.netgen.umbilic",
           "curvnet.harness.config", "curvnet.harness.experiments", "curvnet.harness.export", "curvnet.cli"]


@pytest.mark.parametrize("name", MODULES)
def test_docstring_examples(name):
    res = doctest.testmod(importlib.import_module(name), optionflags=doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE)
    assert res.failed == 0
