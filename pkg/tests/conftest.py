import numpy as np
from hypothesis import settings, strategies as st

from ccmis.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def small_graphs(draw, max_n: int = 12):
    """Arbitrary simple graphs on up to ``max_n`` vertices."""
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, b in zip(pairs, bits) if b]
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


# criterion number -> "criterion N: PASS|FAIL  detail", filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
