import numpy as np
import pytest

from costlens.catalog import builtin_cityscapes_catalog
from costlens.synth import generate_suite, write_dataset


@pytest.fixture(scope="session")
def catalog():
    return builtin_cityscapes_catalog()


@pytest.fixture(scope="session")
def small_suite():
    """Three small noisy scenes shared by pipeline-level tests."""
    return generate_suite(3, 1234, height=48, width=80, noise=0.3)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory, small_suite):
    directory = tmp_path_factory.mktemp("fixture_dataset")
    write_dataset(small_suite, directory, extra_manifest={"seed": 1234, "noise": 0.3})
    return directory


def random_distributions(rng, shape, num_classes):
    """Strictly positive random distributions of the requested pixel shape."""
    raw = rng.random(shape + (num_classes,)) + 1e-6
    return raw / raw.sum(axis=-1, keepdims=True)
