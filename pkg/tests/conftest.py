import networkx as nx
from hypothesis import strategies as st

from arboreal.tree_core import WeightedRootedTree


def nx_graph(tree: WeightedRootedTree) -> nx.Graph:
    g = nx.Graph()
    g.add_node(tree.root)
    for p, c, x in tree.edges():
        g.add_edge(p, c, weight=x)
    return g


@st.composite
def trees(draw, max_n: int = 25, lengths=st.sampled_from([0.5, 1.0, 2.0, 3.0])):
    n = draw(st.integers(1, max_n))
    parent, length = {}, {}
    for i in range(1, n):
        parent[f"v{i:02d}"] = f"v{draw(st.integers(0, i - 1)):02d}"
        length[f"v{i:02d}"] = draw(lengths)
    return WeightedRootedTree("v00", parent, length)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
