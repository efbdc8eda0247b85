import json
import os

import pytest

from fortag import corpus, embedder, fields

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
PUBMED_CORPUS = os.path.join(FIXTURES, "pubmed_corpus")

# small, fast settings shared by tests that need a trained model
TOY_PARAMS = embedder.ModelParams(
    dim=16, epoch=10, min_count=2, buckets=5000, learning_rate=0.5, seed=3
)

SEPARABLE = [
    ("heart cardiac arrhythmia", ("cardio",)),
    ("cardiac heart rhythm", ("cardio",)),
    ("brain neurons cortex", ("neuro",)),
    ("cortex brain synapse", ("neuro",)),
]


def fixture_path(*parts):
    return os.path.join(FIXTURES, *parts)


def load_json(*parts):
    with open(fixture_path(*parts), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def corpus_labeled():
    with open(os.path.join(PUBMED_CORPUS, "publications.jsonl"), encoding="utf-8") as fh:
        records = corpus.parse_publications(fh)
    with open(os.path.join(PUBMED_CORPUS, "journals.csv"), encoding="utf-8") as fh:
        journals = corpus.parse_journal_list(fh)
    return corpus.match_for_codes(records, journals)


@pytest.fixture(scope="session")
def corpus_scheme(corpus_labeled):
    return fields.build_scheme(corpus_labeled)


@pytest.fixture(scope="session")
def title_model(corpus_labeled, corpus_scheme):
    """Toy model trained on fixture abstracts; a few hundred words."""
    from fortag import sampler

    docs = sampler.build_channel_documents(corpus_labeled, corpus_scheme, "abstract")
    return embedder.train([(d.text, d.labels) for d in docs], TOY_PARAMS)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose the call-phase outcome to fixtures (used by the acceptance report)
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
