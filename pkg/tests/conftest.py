from __future__ import annotations

import numpy as np
import pytest

from riskbench.corpus import Assessment, RegisterSnapshot, RiskItem
from riskbench.resources import data_path
from riskbench.vectorize import EmbeddingBackend, default_stopwords, load_word_vectors


@pytest.fixture(scope="session")
def stopwords():
    return default_stopwords()


@pytest.fixture(scope="session")
def reference_backend():
    return load_word_vectors(data_path("embeddings", "reference_word_vectors.txt"))


@pytest.fixture(scope="session")
def expost_manifest():
    return data_path("fixtures", "expost", "manifest.json")


def make_item(risk_id, name, probability=None, cost=None, schedule=None, **kwargs):
    return RiskItem(
        risk_id=risk_id,
        name=name,
        assessment=Assessment(
            probability_band=probability, cost_band=cost, schedule_band=schedule
        ),
        **kwargs,
    )


def make_register(*names, ordinal=0):
    return RegisterSnapshot(
        ordinal=ordinal,
        label=None,
        items=tuple(make_item(f"r{i}", name) for i, name in enumerate(names)),
    )


def toy_backend(table: dict[str, list[float]], stop_words=frozenset()) -> EmbeddingBackend:
    """Hand-built word table for tests with exact vectors."""
    dim = len(next(iter(table.values())))
    return EmbeddingBackend(
        kind="word_average",
        dimension=dim,
        word_table={k: np.array(v, dtype=float) for k, v in table.items()},
        stop_words=stop_words,
    )
