"""Exact zero-sum matrix games: value, optimal mixes and the vertices of the optimal polytope."""

from pigames import NormalFormGame, format_mixed, optimal_polytope_vertices, solve

for matrix in ([[1, 0], [0, 1]], [[1, 0], [0, 1], ["1/2", 0]], [[1, 0], [0, 1], ["1/2", "1/2"]]):
    nf = NormalFormGame.from_matrix(matrix)
    sol = solve(nf)
    verts = optimal_polytope_vertices(nf)
    print(f"matrix {matrix}")
    print(f"  value {sol.value}, optA {format_mixed(sol.optA)}, optB {format_mixed(sol.optB)}")
    print(f"  {len(verts)} optimal vertices: " + "; ".join(format_mixed(x) for x in verts))
