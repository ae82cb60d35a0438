"""Chebyshev-metric kd-tree kernels (numba).

Only two queries are needed by the KSG estimator: the distance to the k-th
nearest neighbour of every point, and the number of points strictly inside a
per-point radius.  Both are exact: every pruning decision compares rounded
coordinate differences, and float subtraction is monotone, so results agree
bit-for-bit with the brute-force kernels below.
"""

import numpy as np
from numba import njit

_STACK = 256


@njit(cache=True)
def build_tree(points, leaf_size):
    n, d = points.shape
    idx = np.arange(n)
    max_nodes = 2 * n + 1
    start = np.empty(max_nodes, np.int64)
    end = np.empty(max_nodes, np.int64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    lo = np.empty((max_nodes, d))
    hi = np.empty((max_nodes, d))

    n_nodes = 1
    start[0] = 0
    end[0] = n
    stack = np.empty(_STACK, np.int64)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        s = start[node]
        e = end[node]
        for c in range(d):
            mn = points[idx[s], c]
            mx = mn
            for m in range(s + 1, e):
                v = points[idx[m], c]
                if v < mn:
                    mn = v
                elif v > mx:
                    mx = v
            lo[node, c] = mn
            hi[node, c] = mx
        if e - s <= leaf_size:
            continue
        split = 0
        spread = hi[node, 0] - lo[node, 0]
        for c in range(1, d):
            if hi[node, c] - lo[node, c] > spread:
                spread = hi[node, c] - lo[node, c]
                split = c
        if spread == 0.0:
            continue
        mid = (s + e) // 2
        _select(points, idx, split, s, e - 1, mid)
        left[node] = n_nodes
        start[n_nodes] = s
        end[n_nodes] = mid
        right[node] = n_nodes + 1
        start[n_nodes + 1] = mid
        end[n_nodes + 1] = e
        stack[top] = n_nodes
        stack[top + 1] = n_nodes + 1
        top += 2
        n_nodes += 2

    pts = np.empty((n, d))
    for m in range(n):
        for c in range(d):
            pts[m, c] = points[idx[m], c]
    return (pts, idx, start[:n_nodes].copy(), end[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            lo[:n_nodes].copy(), hi[:n_nodes].copy())


@njit(cache=True)
def _select(points, idx, dim, lo, hi, nth):
    """Reorder idx[lo:hi+1] so position nth holds its order statistic."""
    while hi > lo:
        a = points[idx[lo], dim]
        b = points[idx[(lo + hi) // 2], dim]
        c = points[idx[hi], dim]
        pivot = max(min(a, b), min(max(a, b), c))
        i = lo
        j = hi
        while i <= j:
            while points[idx[i], dim] < pivot:
                i += 1
            while points[idx[j], dim] > pivot:
                j -= 1
            if i <= j:
                t = idx[i]
                idx[i] = idx[j]
                idx[j] = t
                i += 1
                j -= 1
        if nth <= j:
            hi = j
        elif nth >= i:
            lo = i
        else:
            return


@njit(cache=True, inline="always")
def _min_dist(q, lo, hi, node):
    out = 0.0
    for c in range(q.shape[0]):
        a = lo[node, c] - q[c]
        if a > out:
            out = a
        b = q[c] - hi[node, c]
        if b > out:
            out = b
    return out


@njit(cache=True, inline="always")
def _max_dist(q, lo, hi, node):
    out = 0.0
    for c in range(q.shape[0]):
        a = abs(q[c] - lo[node, c])
        if a > out:
            out = a
        b = abs(hi[node, c] - q[c])
        if b > out:
            out = b
    return out


@njit(cache=True)
def tree_kth_distance(tree, kk):
    """Chebyshev distance from each tree point to its kk-th nearest neighbour.

    Output is in the caller's original point order.
    """
    pts, order, start, end, left, right, lo, hi = tree
    queries = pts
    nq, d = queries.shape
    out = np.empty(nq)
    best = np.empty(kk)
    stack = np.empty(_STACK, np.int64)
    for i in range(nq):
        q = queries[i]
        best[:] = np.inf
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if _min_dist(q, lo, hi, node) >= best[kk - 1]:
                continue
            lc = left[node]
            if lc < 0:
                for m in range(start[node], end[node]):
                    dist = 0.0
                    for c in range(d):
                        a = abs(pts[m, c] - q[c])
                        if a > dist:
                            dist = a
                    if dist < best[kk - 1]:
                        j = kk - 1
                        while j > 0 and best[j - 1] > dist:
                            best[j] = best[j - 1]
                            j -= 1
                        best[j] = dist
                continue
            rc = right[node]
            dl = _min_dist(q, lo, hi, lc)
            dr = _min_dist(q, lo, hi, rc)
            # nearer child goes on top of the stack
            if dl <= dr:
                stack[top] = rc
                stack[top + 1] = lc
            else:
                stack[top] = lc
                stack[top + 1] = rc
            top += 2
        out[order[i]] = best[kk - 1]
    return out


@njit(cache=True)
def tree_count_within(tree, radii):
    """Per tree point, how many tree points lie strictly within its radius.

    ``radii`` and the output are in the caller's original point order.
    """
    pts, order, start, end, left, right, lo, hi = tree
    queries = pts
    nq, d = queries.shape
    out = np.zeros(nq, np.int64)
    stack = np.empty(_STACK, np.int64)
    for i in range(nq):
        q = queries[i]
        r = radii[order[i]]
        cnt = 0
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if _min_dist(q, lo, hi, node) >= r:
                continue
            if _max_dist(q, lo, hi, node) < r:
                cnt += end[node] - start[node]
                continue
            lc = left[node]
            if lc < 0:
                for m in range(start[node], end[node]):
                    inside = True
                    for c in range(d):
                        if abs(pts[m, c] - q[c]) >= r:
                            inside = False
                            break
                    if inside:
                        cnt += 1
                continue
            stack[top] = lc
            stack[top + 1] = right[node]
            top += 2
        out[order[i]] = cnt
    return out


@njit(cache=True)
def brute_kth_distance(points, kk):
    n, d = points.shape
    out = np.empty(n)
    best = np.empty(kk)
    for i in range(n):
        best[:] = np.inf
        for m in range(n):
            v = 0.0
            for c in range(d):
                a = abs(points[m, c] - points[i, c])
                if a > v:
                    v = a
            if v < best[kk - 1]:
                j = kk - 1
                while j > 0 and best[j - 1] > v:
                    best[j] = best[j - 1]
                    j -= 1
                best[j] = v
        out[i] = best[kk - 1]
    return out


@njit(cache=True)
def brute_count_within(points, radii):
    n, d = points.shape
    out = np.zeros(n, np.int64)
    for i in range(n):
        r = radii[i]
        cnt = 0
        for m in range(n):
            inside = True
            for c in range(d):
                if abs(points[m, c] - points[i, c]) >= r:
                    inside = False
                    break
            if inside:
                cnt += 1
        out[i] = cnt
    return out


# Planar marginals: a merge-sort tree answers "how many points strictly
# within r" in O(log^2 N). Rounded differences fl(p - q) are monotone in p,
# so binary searches on the exact predicate give the brute-force answer.

@njit(cache=True)
def build_planar(points):
    n = points.shape[0]
    order = np.argsort(points[:, 0], kind="mergesort")
    xs = points[order, 0].copy()
    levels = 1
    while (1 << (levels - 1)) < n:
        levels += 1
    ys = np.empty((levels, n))
    for m in range(n):
        ys[0, m] = points[order[m], 1]
    for k in range(1, levels):
        half = 1 << (k - 1)
        width = half << 1
        for s in range(0, n, width):
            a = s
            amax = min(s + half, n)
            b = amax
            bmax = min(s + width, n)
            o = s
            while a < amax and b < bmax:
                if ys[k - 1, a] <= ys[k - 1, b]:
                    ys[k, o] = ys[k - 1, a]
                    a += 1
                else:
                    ys[k, o] = ys[k - 1, b]
                    b += 1
                o += 1
            while a < amax:
                ys[k, o] = ys[k - 1, a]
                a += 1
                o += 1
            while b < bmax:
                ys[k, o] = ys[k - 1, b]
                b += 1
                o += 1
    return xs, ys


@njit(cache=True, inline="always")
def _first_above(arr, lo, hi, q, r):
    # first index in [lo, hi) with arr - q > -r
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] - q > -r:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, inline="always")
def _first_outside(arr, lo, hi, q, r):
    # first index in [lo, hi) with arr - q >= r
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] - q >= r:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def planar_count_within(planar, points, radii):
    xs, ys = planar
    n = xs.shape[0]
    out = np.zeros(points.shape[0], np.int64)
    for i in range(points.shape[0]):
        qx = points[i, 0]
        qy = points[i, 1]
        r = radii[i]
        if not r > 0.0:
            continue
        a = _first_above(xs, 0, n, qx, r)
        b = _first_outside(xs, a, n, qx, r)
        cnt = 0
        while a < b:
            k = 0
            while ((a >> k) & 1) == 0 and a + (2 << k) <= b and (2 << k) <= n:
                k += 1
            width = 1 << k
            end = min(a + width, n)
            lo = _first_above(ys[k], a, end, qy, r)
            hi = _first_outside(ys[k], lo, end, qy, r)
            cnt += hi - lo
            a += width
        out[i] = cnt
    return out
