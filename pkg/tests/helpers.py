from amnesiac.graph import Graph

from oracle import nx_graph


def to_nx(g: Graph):
    return nx_graph(g.edges, g.nodes)


def trimmed(sets):
    sets = list(sets)
    while len(sets) > 1 and not sets[-1]:
        sets.pop()
    return sets
