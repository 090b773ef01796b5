import pytest

from biprep.corpus import Sentence


def make_sentence(raw, doc_id="d0", index=0, lang="en", source="other"):
    return Sentence(
        doc_id=doc_id,
        index=index,
        lang=lang,
        tokens=raw.split(),
        raw=raw,
        source=source,
    )


@pytest.fixture
def sent_factory():
    return make_sentence
