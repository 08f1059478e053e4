"""Randomized self-checks used by the batch front-end.

Self-contained linear-model oracles (independent of the closed-form
rules they exercise) plus dual-route agreement checks.  Each suite
returns (ok, details) with exact counts; the front-end turns them into
report lines.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .multidisk import LinkingMatrix, spanning_trees
from .orientation import (
    FACE_G,
    FACE_M,
    LinearFiberProblem,
    association_sign,
    boundary_face_sign,
    fiber_orientation_sign,
    flip_sign,
)


def _rand_frac(rng, lo=-5, hi=5, max_den=3):
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def _rand_matrix(rng, rows, cols):
    return [[_rand_frac(rng) for _ in range(cols)] for _ in range(rows)]


def _sign_of(x):
    return 1 if x > 0 else -1


def _random_problem(rng, max_dim, need_m=False, need_g=False, min_fiber=0):
    while True:
        dim_m = rng.randint(1 if need_m else 0, max_dim)
        dim_g = rng.randint(1 if need_g else 0, max_dim)
        dim_x = rng.randint(0, max_dim)
        if dim_m + dim_g - dim_x < min_fiber:
            continue
        prob = LinearFiberProblem.build(
            _rand_matrix(rng, dim_x, dim_m), _rand_matrix(rng, dim_x, dim_g),
            dim_m, dim_g, dim_x,
            rng.choice((1, -1)), rng.choice((1, -1)), rng.choice((1, -1)),
        )
        if dim_x == 0 or linalg.rank(prob.combined_map()) == dim_x:
            return prob


def _boundary_face_case(rng, face, max_dim):
    """One oracle comparison for the boundary-face sign rule."""
    while True:
        prob = _random_problem(
            rng, max_dim, need_m=(face == FACE_M), need_g=(face == FACE_G),
            min_fiber=1,
        )
        dim_m, dim_g = prob.space_m.dim, prob.space_g.dim
        dim_x = prob.space_x.dim
        n = dim_m + dim_g
        combined = prob.combined_map()
        cut = dim_m - 1 if face == FACE_M else n - 1
        kernel = linalg.nullspace(combined) if dim_x else [
            [Fraction(int(i == j)) for i in range(n)] for j in range(n)
        ]
        face_vecs = linalg.nullspace(
            combined + [[Fraction(int(j == cut)) for j in range(n)]]
        )
        if len(face_vecs) != len(kernel) - 1:
            continue
        if face == FACE_M:
            sub = LinearFiberProblem.build(
                [row[: dim_m - 1] for row in prob.df],
                [list(row) for row in prob.dg],
                dim_m - 1, dim_g, dim_x,
                prob.space_m.sign, prob.space_g.sign, prob.space_x.sign,
            )
        else:
            sub = LinearFiberProblem.build(
                [list(row) for row in prob.df],
                [row[: dim_g - 1] for row in prob.dg],
                dim_m, dim_g - 1, dim_x,
                prob.space_m.sign, prob.space_g.sign, prob.space_x.sign,
            )
        if dim_x and linalg.rank(sub.combined_map()) != dim_x:
            continue
        outward = next(v for v in kernel if v[cut] != 0)
        if outward[cut] < 0:
            outward = [-x for x in outward]
        kmat = linalg.columns_matrix(kernel)
        sigma = fiber_orientation_sign(prob, kmat)
        coeffs = linalg.solve(kmat, linalg.columns_matrix(face_vecs + [outward]))
        observed = sigma * _sign_of(linalg.det(coeffs))
        dropped = [[v[i] for v in face_vecs] for i in range(n) if i != cut]
        observed *= fiber_orientation_sign(sub, dropped)
        expected = boundary_face_sign(dim_m, dim_g, dim_x, face)
        return observed == expected


def _flip_case(rng, max_dim):
    while True:
        dim_m = rng.randint(0, max_dim)
        dim_g = rng.randint(0, max_dim)
        dim_x = rng.randint(0, min(4, dim_m + dim_g))
        sm = [rng.choice((1, -1)) for _ in range(dim_m)]
        sg = [rng.choice((1, -1)) for _ in range(dim_g)]
        sx = [rng.choice((1, -1)) for _ in range(dim_x)]
        half = Fraction(1, 2)

        def equivariant(rows, cols, srow, scol):
            a = _rand_matrix(rng, rows, cols)
            return [[half * (a[i][j] + srow[i] * a[i][j] * scol[j])
                     for j in range(cols)] for i in range(rows)]

        prob = LinearFiberProblem.build(
            equivariant(dim_x, dim_m, sx, sm),
            equivariant(dim_x, dim_g, sx, sg),
            dim_m, dim_g, dim_x,
            rng.choice((1, -1)), rng.choice((1, -1)), rng.choice((1, -1)),
        )
        if dim_x and linalg.rank(prob.combined_map()) != dim_x:
            continue
        n = dim_m + dim_g
        if n == 0:
            return True
        vecs = linalg.nullspace(prob.combined_map()) if dim_x else [
            [Fraction(int(i == j)) for i in range(n)] for j in range(n)
        ]
        kmat = linalg.columns_matrix(vecs) if vecs else [[] for _ in range(n)]
        diag = sm + sg
        flipped = ([[diag[i] * kmat[i][j] for j in range(len(vecs))]
                    for i in range(n)] if vecs else kmat)
        observed = (fiber_orientation_sign(prob, kmat)
                    * fiber_orientation_sign(prob, flipped))
        expected = flip_sign(
            _diag_sign(sm), _diag_sign(sg), _diag_sign(sx)
        )
        return observed == expected


def _diag_sign(entries):
    s = 1
    for e in entries:
        s *= e
    return s


def _association_case(rng, max_dim):
    while True:
        dims = [rng.randint(0, max_dim) for _ in range(5)]
        dim_m, dim_g, dim_c, dim_x, dim_y = dims
        signs = [rng.choice((1, -1)) for _ in range(5)]
        s_m, s_g, s_c, s_x, s_y = signs
        df = _rand_matrix(rng, dim_x, dim_m)
        de = _rand_matrix(rng, dim_y, dim_m)
        dg = _rand_matrix(rng, dim_x, dim_g)
        dh = _rand_matrix(rng, dim_y, dim_c)
        inner = LinearFiberProblem.build(df, dg, dim_m, dim_g, dim_x,
                                         s_m, s_g, s_x)
        if dim_x and linalg.rank(inner.combined_map()) != dim_x:
            continue
        n1 = dim_m + dim_g
        k1_vecs = linalg.nullspace(inner.combined_map()) if dim_x else [
            [Fraction(int(i == j)) for i in range(n1)] for j in range(n1)
        ]
        d1 = len(k1_vecs)
        k1 = linalg.columns_matrix(k1_vecs)
        inner_sign = fiber_orientation_sign(
            inner, k1 if d1 else [[] for _ in range(n1)]
        )
        if d1 and inner_sign == -1:
            k1_vecs[0] = [-x for x in k1_vecs[0]]
            k1 = linalg.columns_matrix(k1_vecs)
            inner_sign = 1
        de_inner = [[sum(de[i][t] * k1[t][j] for t in range(dim_m))
                     for j in range(d1)] for i in range(dim_y)]
        outer = LinearFiberProblem.build(de_inner, dh, d1, dim_c, dim_y,
                                         inner_sign, s_c, s_y)
        if dim_y and linalg.rank(outer.combined_map()) != dim_y:
            continue
        big_df = df + de
        big_dg = ([list(row) + [Fraction(0)] * dim_c for row in dg]
                  + [[Fraction(0)] * dim_g + list(row) for row in dh])
        onestep = LinearFiberProblem.build(
            big_df, big_dg, dim_m, dim_g + dim_c, dim_x + dim_y,
            s_m, s_g * s_c, s_x * s_y,
        )
        if (dim_x + dim_y) and linalg.rank(onestep.combined_map()) != dim_x + dim_y:
            continue
        n = dim_m + dim_g + dim_c
        kb_vecs = linalg.nullspace(onestep.combined_map()) if dim_x + dim_y else [
            [Fraction(int(i == j)) for i in range(n)] for j in range(n)
        ]
        if not kb_vecs:
            continue
        kb = linalg.columns_matrix(kb_vecs)
        one_sign = fiber_orientation_sign(onestep, kb)
        mg_part = [[kb[i][j] for j in range(len(kb_vecs))] for i in range(n1)]
        coeffs = linalg.solve(k1, mg_part) if d1 else []
        if d1 and coeffs is None:
            continue
        c_part = [[kb[n1 + i][j] for j in range(len(kb_vecs))]
                  for i in range(dim_c)]
        iter_sign = fiber_orientation_sign(
            outer, (coeffs if d1 else []) + c_part
        )
        expected = association_sign(dim_x, dim_y - dim_c)
        return iter_sign * one_sign == expected


def orientation_suite(rng, instances=1000, max_dim=6):
    """Closed-form sign rules against the determinant model."""
    failures = 0
    per_kind = max(1, instances // 4)
    for _ in range(per_kind):
        if not _boundary_face_case(rng, FACE_M, min(max_dim, 5)):
            failures += 1
    for _ in range(per_kind):
        if not _boundary_face_case(rng, FACE_G, min(max_dim, 5)):
            failures += 1
    for _ in range(per_kind):
        if not _flip_case(rng, min(max_dim, 4)):
            failures += 1
    for _ in range(instances - 3 * per_kind):
        if not _association_case(rng, 3):
            failures += 1
    return failures == 0, "%d instances, %d failures" % (instances, failures)


def matrix_tree_suite(rng, matrices=200, max_vertices=7):
    """Cofactor determinant against explicit tree enumeration."""
    from .lattice import Target
    from .multidisk import DiskAtom, MultiDisk, tree_weight_sum, \
        tree_weight_sum_enumerated

    target = Target([("g", 1, 2)])
    failures = 0
    checked = 0
    per_m = max(1, matrices // max_vertices)
    for m in range(1, max_vertices + 1):
        for _ in range(per_m):
            loops = ["t%d" % i for i in range(m)]
            entries = [
                (loops[i], loops[j],
                 Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
                for i in range(m) for j in range(i + 1, m)
            ]
            links = LinkingMatrix(entries)
            for ln in loops:
                links.declare_loop(ln)
            config = MultiDisk(tuple(
                DiskAtom(target.degree((1,)), frozenset(["p%d" % i]),
                         frozenset(), 1, loops[i])
                for i in range(m)
            ))
            checked += 1
            if tree_weight_sum(config, links) != tree_weight_sum_enumerated(
                config, links, cap=max_vertices
            ):
                failures += 1
    return failures == 0, "%d matrices, %d failures" % (checked, failures)


def tree_count_suite(max_vertices=7):
    """Tree enumeration against the closed-form count."""
    for m in range(1, max_vertices + 1):
        expected = 1 if m == 1 else m ** (m - 2)
        got = len(set(spanning_trees(m, cap=max_vertices)))
        if got != expected:
            return False, "vertex count %d: %d trees, expected %d" % (
                m, got, expected
            )
    return True, "all vertex counts up to %d" % max_vertices
