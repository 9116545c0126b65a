"""Shared fixtures: synthetic corpora reused across test modules."""

from __future__ import annotations

import pytest

from neuro.dataset import Profile, generate_synthetic


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """5-per-class separable corpus for service/CLI/pipeline tests."""
    out = tmp_path_factory.mktemp("corpus-small")
    return generate_synthetic(5, Profile.SEPARABLE, seed=11, out_dir=out)


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory):
    """The acceptance-criteria corpus: 30 per class, SEPARABLE, seed 7."""
    out = tmp_path_factory.mktemp("corpus-acceptance")
    return generate_synthetic(30, Profile.SEPARABLE, seed=7, out_dir=out)
