import random

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from fuzzanon.generators import ModelSpec, generate
from fuzzanon.graph import Graph

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def gnp(n, p, seed):
    rng = random.Random(seed)
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])


def model_graphs(count, max_n=500, seed=0):
    """``count`` seeded ER/BA/WS graphs of assorted size and density."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        model = ("ER", "BA", "WS")[i % 3]
        n = rng.randint(20, max_n)
        cap = (n - 1) // 2 - (model == "WS")
        m = rng.randint(1, max(1, min(12, cap)))
        out.append(generate(ModelSpec(model, n, m, 0.05, seed=rng.getrandbits(32))))
    return out


@st.composite
def graphs(draw, min_nodes=1, max_nodes=14):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    picked = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, picked)


@pytest.fixture
def k3():
    return complete(3)


@pytest.fixture
def p3():
    return path(3)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
