import pytest

from gridslice.documents import load_builtin
from gridslice.intent_dsl import RequirementCatalog
from gridslice.runtime import GridSliceSystem, SystemInputs


@pytest.fixture(scope="session")
def catalog() -> RequirementCatalog:
    return RequirementCatalog.from_document(load_builtin("catalog.yaml"))


@pytest.fixture(scope="session")
def builtin_inputs() -> SystemInputs:
    return SystemInputs.builtin()


@pytest.fixture
def system(builtin_inputs) -> GridSliceSystem:
    return GridSliceSystem(builtin_inputs, seed=42)
