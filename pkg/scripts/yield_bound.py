"""Recompute the ingredients of the ring -> pairs -> ring yield bound."""
from graphpurify.analysis import yield_bound_ring


def main():
    rep = yield_bound_ring()
    for cut, s in sorted(rep.cut_entropies.items()):
        print(f"cut {cut}: S = {s:.12f}")
    print(f"neighbour pair decomposition error:      {rep.neighbor_decomposition_error:.2e}")
    print(f"non-neighbour pair decomposition error:  {rep.non_neighbor_decomposition_error:.2e}")
    print(f"non-neighbour form with Hadamards error: {rep.non_neighbor_hadamard_form_error:.2e}")
    print(f"pairs crossing a cut: {rep.crossing_count}, inside: {rep.inside_count}, cuts: {rep.n_cuts}")
    print(f"bound M~/M <= {rep.bound}")
    for line in rep.notes if isinstance(rep.notes, list) else [rep.notes]:
        if line:
            print(line)


if __name__ == "__main__":
    main()
