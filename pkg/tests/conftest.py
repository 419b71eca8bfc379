import pathlib

import pytest

from cpforge import frontend

CORPUS = pathlib.Path(__file__).parent / "corpus"


def read_corpus(name: str) -> str:
    return (CORPUS / name).read_text()


def inject_text(model_text: str, data_text: str | None = None,
                model_file: str = "<model>", data_file: str = "<data>"):
    model_ast = frontend.parse_model(model_text, file=model_file)
    data_ast = None
    if data_text is not None:
        data_ast = frontend.parse_data(data_text, file=data_file)
    return frontend.inject(model_ast, data_ast)


def inject_corpus(model_name: str, data_name: str | None = None):
    data_text = read_corpus(data_name) if data_name else None
    return inject_text(read_corpus(model_name), data_text,
                       model_file=str(CORPUS / model_name),
                       data_file=str(CORPUS / data_name) if data_name else
                       "<data>")


@pytest.fixture
def golfers():
    return inject_corpus("golfers.scm", "golfers.scd")


@pytest.fixture
def golfers_small():
    return inject_corpus("golfers.scm", "golfers_small.scd")
