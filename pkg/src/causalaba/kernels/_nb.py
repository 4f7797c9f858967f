"""Numba kernels: d-connection, closure, fact tables and the DAG search."""

import time

import numpy as np
from numba import njit, objmode

from ._common import (
    ABS,
    BWD,
    CAPPED,
    DONE,
    FWD,
    K_ARROW,
    K_DEP,
    K_INDEP,
    K_NOEDGE,
    TIMEOUT,
    WEIGHT_EPS,
)


@njit(cache=True)
def closure(adj):
    d = adj.shape[0]
    r = np.zeros((d, d), dtype=np.uint8)
    for i in range(d):
        for j in range(d):
            if adj[i, j]:
                r[i, j] = 1
    for k in range(d):
        for i in range(d):
            if r[i, k]:
                for j in range(d):
                    if r[k, j]:
                        r[i, j] = 1
    return r


@njit(cache=True)
def _opens(clos, inz):
    # node is in Z or has a (possible) descendant in Z
    d = clos.shape[0]
    out = np.zeros(d, dtype=np.uint8)
    for v in range(d):
        if inz[v]:
            out[v] = 1
            continue
        for w in range(d):
            if inz[w] and clos[v, w]:
                out[v] = 1
                break
    return out


@njit(cache=True)
def reach(arr, inz, opens, x, y):
    """Bayes-ball walk from x; True when y is reached by an active trail."""
    d = arr.shape[0]
    seen = np.zeros((d, 2), dtype=np.uint8)
    stack_v = np.empty(2 * d, dtype=np.int64)
    stack_t = np.empty(2 * d, dtype=np.int64)
    top = 0
    for w in range(d):
        # t=0: entered w along an arrow into w; t=1: entered w from a child
        if arr[x, w] and not seen[w, 0]:
            seen[w, 0] = 1
            stack_v[top] = w
            stack_t[top] = 0
            top += 1
        if arr[w, x] and not seen[w, 1]:
            seen[w, 1] = 1
            stack_v[top] = w
            stack_t[top] = 1
            top += 1
    while top > 0:
        top -= 1
        v = stack_v[top]
        t = stack_t[top]
        if v == y:
            return True
        down = not inz[v]
        up = (opens[v] != 0) if t == 0 else (not inz[v])
        for w in range(d):
            if down and arr[v, w] and not seen[w, 0]:
                seen[w, 0] = 1
                stack_v[top] = w
                stack_t[top] = 0
                top += 1
            if up and arr[w, v] and not seen[w, 1]:
                seen[w, 1] = 1
                stack_v[top] = w
                stack_t[top] = 1
                top += 1
    return False


@njit(cache=True)
def visited(arr, inz, opens, x):
    """Bitmask of the nodes reached by active trails from x."""
    d = arr.shape[0]
    seen = np.zeros((d, 2), dtype=np.uint8)
    stack_v = np.empty(2 * d, dtype=np.int64)
    stack_t = np.empty(2 * d, dtype=np.int64)
    top = 0
    for w in range(d):
        if arr[x, w] and not seen[w, 0]:
            seen[w, 0] = 1
            stack_v[top] = w
            stack_t[top] = 0
            top += 1
        if arr[w, x] and not seen[w, 1]:
            seen[w, 1] = 1
            stack_v[top] = w
            stack_t[top] = 1
            top += 1
    while top > 0:
        top -= 1
        v = stack_v[top]
        t = stack_t[top]
        down = not inz[v]
        up = (opens[v] != 0) if t == 0 else (not inz[v])
        for w in range(d):
            if down and arr[v, w] and not seen[w, 0]:
                seen[w, 0] = 1
                stack_v[top] = w
                stack_t[top] = 0
                top += 1
            if up and arr[w, v] and not seen[w, 1]:
                seen[w, 1] = 1
                stack_v[top] = w
                stack_t[top] = 1
                top += 1
    m = np.int64(0)
    for w in range(d):
        if seen[w, 0] or seen[w, 1]:
            m |= np.int64(1) << w
    return m


@njit(cache=True)
def dconnected(adj, x, y, inz):
    clos = closure(adj)
    return reach(adj, inz, _opens(clos, inz), x, y)


@njit(cache=True)
def fact_table(models, fx, fy, fz):
    """d-separation truth table: out[k, f] is True iff fact f's triple is d-separated in model k."""
    nm = models.shape[0]
    nf = fx.shape[0]
    out = np.zeros((nm, nf), dtype=np.bool_)
    for k in range(nm):
        adj = models[k]
        clos = closure(adj)
        for f in range(nf):
            opens = _opens(clos, fz[f])
            out[k, f] = not reach(adj, fz[f], opens, fx[f], fy[f])
    return out


@njit(cache=True)
def _graphs(dom, pi, pj, d):
    dec = np.zeros((d, d), dtype=np.uint8)
    pos = np.zeros((d, d), dtype=np.uint8)
    for p in range(dom.shape[0]):
        s = dom[p]
        i = pi[p]
        j = pj[p]
        if s & FWD:
            pos[i, j] = 1
            if s == FWD:
                dec[i, j] = 1
        if s & BWD:
            pos[j, i] = 1
            if s == BWD:
                dec[j, i] = 1
    return dec, pos


@njit(cache=True)
def _violated(dom, f, fx, fy, fz, fkind, pid, dec, pos, cdec, cpos):
    """True when fact f fails in every completion of the partial assignment."""
    k = fkind[f]
    x = fx[f]
    y = fy[f]
    if k == K_INDEP:
        return reach(dec, fz[f], _opens(cdec, fz[f]), x, y)
    if k == K_DEP:
        return not reach(pos, fz[f], _opens(cpos, fz[f]), x, y)
    if x < y:
        p = pid[x, y]
        bit = FWD
    else:
        p = pid[y, x]
        bit = BWD
    if k == K_ARROW:
        return (dom[p] & bit) == 0
    if k == K_NOEDGE:
        return (dom[p] & ABS) == 0
    return False


@njit(cache=True)
def _propagate(dom, pi, pj, d, pid, fx, fy, fz, fkind, fhard, fw, soft):
    """Acyclicity deductions plus fact checks; returns (ok, weight upper bound)."""
    npair = dom.shape[0]
    while True:
        dec, pos = _graphs(dom, pi, pj, d)
        cdec = closure(dec)
        for v in range(d):
            if cdec[v, v]:
                return False, 0.0
        changed = False
        for p in range(npair):
            s = dom[p]
            if s == FWD or s == BWD or s == ABS:
                continue
            i = pi[p]
            j = pj[p]
            if (s & FWD) and cdec[j, i]:
                s &= ~FWD
            if (s & BWD) and cdec[i, j]:
                s &= ~BWD
            if s == 0:
                return False, 0.0
            if s != dom[p]:
                dom[p] = s
                changed = True
        if not changed:
            break
    cpos = closure(pos)
    bound = 0.0
    for f in range(fx.shape[0]):
        if fhard[f]:
            if _violated(dom, f, fx, fy, fz, fkind, pid, dec, pos, cdec, cpos):
                return False, 0.0
        elif soft:
            if not _violated(dom, f, fx, fy, fz, fkind, pid, dec, pos, cdec, cpos):
                bound += fw[f]
    return True, bound


@njit(cache=True)
def _popcount3(s):
    return (s & 1) + ((s >> 1) & 1) + ((s >> 2) & 1)


@njit(cache=True)
def _now():
    with objmode(t="float64"):
        t = time.perf_counter()
    return t


@njit(cache=True)
def _fact_masks(d, fx, fy, fz):
    nf = fx.shape[0]
    out = np.zeros(nf, dtype=np.int64)
    for f in range(nf):
        m = (np.int64(1) << fx[f]) | (np.int64(1) << fy[f])
        for v in range(d):
            if fz[f, v]:
                m |= np.int64(1) << v
        out[f] = m
    return out


@njit(cache=True)
def _zmask(inz, d):
    m = np.int64(0)
    for v in range(d):
        if inz[v]:
            m |= np.int64(1) << v
    return m


@njit(cache=True)
def _candidate(v, placed, d, allow, noedge_ok):
    """Required and optional parents of ``v`` among the placed nodes; ok=False if ``v`` cannot go next."""
    req = np.int64(0)
    opt = np.int64(0)
    for u in range(d):
        if u == v:
            continue
        if (placed >> u) & 1:
            if allow[u, v]:
                if noedge_ok[u, v]:
                    opt |= np.int64(1) << u
                else:
                    req |= np.int64(1) << u
            elif not noedge_ok[u, v]:
                return False, req, opt
        elif not allow[v, u] and not noedge_ok[v, u]:
            # the pair must be u -> v, impossible once v precedes u
            return False, req, opt
    return True, req, opt


@njit(cache=True)
def search(d, pi, pj, dom0, fx, fy, fz, fkind, fhard, fw, soft, cap, budget_s, find_one):
    """Enumerate all DAG completions of ``dom0`` that respect the facts.

    Nodes are placed one at a time, each with a parent set drawn from the
    nodes already placed.  Only the lexicographically smallest topological
    order of a DAG is generated, so each DAG appears once.  The placed nodes
    always form an ancestral set, hence a fact's d-separation status is final
    as soon as its variables are placed and is checked at that point.  A hard
    independence is checked earlier, once its endpoints are placed: members
    of Z placed later can open paths but never block one.  Hard
    facts prune; soft facts are maximised by branch and bound, keeping every
    model tied at the best weight.  Returns (states, weights, outcome, nodes, prunes).
    """
    npair = dom0.shape[0]
    pid = np.full((d, d), -1, dtype=np.int64)
    for p in range(npair):
        pid[pi[p], pj[p]] = p
    out = np.empty((max(cap, 1) + 1, npair), dtype=np.int8)
    wts = np.empty(max(cap, 1) + 1, dtype=np.float64)
    nout = 0
    best = -1.0
    outcome = DONE
    nodes = 1
    prunes = 0
    t0 = _now()

    dom = dom0.copy()
    ok, _ = _propagate(dom, pi, pj, d, pid, fx, fy, fz, fkind, fhard, fw, False)
    if not ok:
        return out[:0].copy(), wts[:0].copy(), outcome, nodes, 1
    allow = np.zeros((d, d), dtype=np.uint8)
    noedge_ok = np.zeros((d, d), dtype=np.uint8)
    for p in range(npair):
        i = pi[p]
        j = pj[p]
        if dom[p] & FWD:
            allow[i, j] = 1
        if dom[p] & BWD:
            allow[j, i] = 1
        if dom[p] & ABS:
            noedge_ok[i, j] = 1
            noedge_ok[j, i] = 1

    nf = fx.shape[0]
    fmask = _fact_masks(d, fx, fy, fz)
    # a satisfiability check may skip DAGs with a covered edge u -> v, u > v:
    # reversing it keeps the equivalence class (so every CI fact) and removes
    # one inverted edge, so a model without one exists whenever any model does
    covered = find_one and not soft
    for f in range(nf):
        if fhard[f] and fkind[f] == K_ARROW:
            covered = False
    total_soft = 0.0
    if soft:
        for f in range(nf):
            if not fhard[f]:
                total_soft += fw[f]

    order = np.full(d, -1, dtype=np.int64)
    par = np.zeros(d, dtype=np.int64)
    arr = np.zeros((d, d), dtype=np.uint8)
    placed = np.zeros(d + 1, dtype=np.int64)
    cand = np.full(d + 1, -1, dtype=np.int64)
    nxt = np.full(d + 1, -1, dtype=np.int64)
    req = np.zeros(d + 1, dtype=np.int64)
    opt = np.zeros(d + 1, dtype=np.int64)
    late = np.zeros(d + 1, dtype=np.int64)
    satw = np.zeros(d + 1, dtype=np.float64)
    decw = np.zeros(d + 1, dtype=np.float64)
    # soft independences already decided along the current branch
    dec = np.zeros((d + 1, max(nf, 1)), dtype=np.uint8)
    hits = np.zeros((d + 1, max(nf, 1)), dtype=np.int64)
    nhit = np.zeros(d + 1, dtype=np.int64)
    # hard CI facts whose last-placed variable is x or y (not in Z) reduce to
    # a condition on that node's parent set; the rest are checked after placement
    endpoint = np.zeros((nf, d), dtype=np.uint8)
    for f in range(nf):
        if fhard[f] and (fkind[f] == K_INDEP or fkind[f] == K_DEP):
            endpoint[f, fx[f]] = 1
            endpoint[f, fy[f]] = 1
    clos_k = np.zeros((d, d), dtype=np.uint8)
    clos_at = -1

    k = 0
    while k >= 0:
        if k == d:
            bound = satw[d]
            if soft and bound > best + WEIGHT_EPS:
                best = bound
                nout = 0
            if nout >= cap:
                outcome = CAPPED
                break
            for p in range(npair):
                i = pi[p]
                j = pj[p]
                if (par[j] >> i) & 1:
                    out[nout, p] = FWD
                elif (par[i] >> j) & 1:
                    out[nout, p] = BWD
                else:
                    out[nout, p] = ABS
            wts[nout] = bound
            nout += 1
            if find_one:
                break
            k -= 1
            clos_at = -1
            v = order[k]
            for u in range(d):
                arr[u, v] = 0
            par[v] = 0
            continue

        # next (node, parent set) choice at depth k
        found = False
        v = -1
        pset = np.int64(0)
        while True:
            if nxt[k] < 0:
                v = cand[k] + 1
                while v < d:
                    if not (placed[k] >> v) & 1:
                        good, r, o = _candidate(v, placed[k], d, allow, noedge_ok)
                        if good:
                            break
                    v += 1
                if v >= d:
                    break
                cand[k] = v
                nxt[k] = -1
                # a parent must be placed no earlier than the last larger node,
                # otherwise v would have been available (and smaller) before it
                lm = np.int64(0)
                for q in range(k - 1, -1, -1):
                    if order[q] > v:
                        lm = placed[k] ^ placed[q]
                        break
                if lm != 0 and ((r | o) & lm) == 0:
                    continue
                # fold endpoint facts into the parent-set choice
                now = placed[k] | (np.int64(1) << v)
                nh = 0
                for f in range(nf):
                    if not endpoint[f, v]:
                        continue
                    m = fmask[f]
                    if fkind[f] == K_INDEP:
                        # unplaced members of Z can only open paths later, so
                        # only the two endpoints need to be placed
                        m = (np.int64(1) << fx[f]) | (np.int64(1) << fy[f])
                    if (m & ~now) != 0 or fz[f, v]:
                        continue
                    if clos_at != k:
                        clos_k = closure(arr)
                        clos_at = k
                    other = fy[f] if fx[f] == v else fx[f]
                    g = (np.int64(1) << other) | (visited(arr, fz[f], _opens(clos_k, fz[f]), other)
                                                  & ~_zmask(fz[f], d))
                    if fkind[f] == K_INDEP:
                        o &= ~g
                        if r & g:
                            good = False
                            break
                    else:
                        if ((r | o) & g) == 0:
                            good = False
                            break
                        hits[k, nh] = g
                        nh += 1
                if not good:
                    continue
                if lm != 0 and ((r | o) & lm) == 0:
                    continue
                nhit[k] = nh
                req[k] = r
                opt[k] = o
                nxt[k] = o
                late[k] = lm
            v = cand[k]
            sm = nxt[k]
            nxt[k] = -1 if sm == 0 else ((sm - 1) & opt[k])
            pset = req[k] | sm
            if late[k] != 0 and (pset & late[k]) == 0:
                continue
            miss = False
            for h in range(nhit[k]):
                if (pset & hits[k, h]) == 0:
                    miss = True
                    break
            if covered and not miss:
                for u in range(v + 1, d):
                    if (pset >> u) & 1 and pset == (par[u] | (np.int64(1) << u)):
                        miss = True
                        break
            if miss:
                continue
            found = True
            break
        if not found:
            cand[k] = -1
            nxt[k] = -1
            k -= 1
            clos_at = -1
            if k >= 0:
                w = order[k]
                for u in range(d):
                    arr[u, w] = 0
                par[w] = 0
            continue

        nodes += 1
        if budget_s > 0 and (nodes & 1023) == 0:
            if _now() - t0 > budget_s:
                outcome = TIMEOUT
                break
        order[k] = v
        par[v] = pset
        for u in range(d):
            if (pset >> u) & 1:
                arr[u, v] = 1
        now = placed[k] | (np.int64(1) << v)
        sw = satw[k]
        dw = decw[k]
        ok = True
        have_clos = False
        clos = arr
        if soft:
            for f in range(nf):
                dec[k + 1, f] = dec[k, f]
        for f in range(nf):
            m = fmask[f]
            if not ((m >> v) & 1):
                continue
            if not fhard[f] and not soft:
                continue
            if not fhard[f] and fkind[f] == K_INDEP:
                # decided violated as soon as the endpoints connect, satisfied
                # once all of its variables are placed
                if dec[k, f] or (((np.int64(1) << fx[f]) | (np.int64(1) << fy[f])) & ~now) != 0:
                    continue
                if not have_clos:
                    clos = closure(arr)
                    have_clos = True
                conn = reach(arr, fz[f], _opens(clos, fz[f]), fx[f], fy[f])
                if conn:
                    dw += fw[f]
                    dec[k + 1, f] = 1
                elif (m & ~now) == 0:
                    dw += fw[f]
                    sw += fw[f]
                    dec[k + 1, f] = 1
                continue
            if fhard[f] and fkind[f] == K_INDEP:
                # a hard independence fails as soon as its endpoints connect
                # given the placed part of Z
                if (((np.int64(1) << fx[f]) | (np.int64(1) << fy[f])) & ~now) != 0:
                    continue
            elif (m & ~now) != 0:
                continue
            if endpoint[f, v] and not fz[f, v]:
                continue
            kind = fkind[f]
            x = fx[f]
            y = fy[f]
            if kind == K_ARROW:
                sat = ((par[y] >> x) & 1) == 1
            elif kind == K_NOEDGE:
                sat = ((par[y] >> x) & 1) == 0 and ((par[x] >> y) & 1) == 0
            else:
                if not have_clos:
                    clos = closure(arr)
                    have_clos = True
                sep = not reach(arr, fz[f], _opens(clos, fz[f]), x, y)
                sat = sep if kind == K_INDEP else not sep
            if fhard[f]:
                if not sat:
                    ok = False
                    break
            else:
                dw += fw[f]
                if sat:
                    sw += fw[f]
        if ok and soft and sw + (total_soft - dw) < best - WEIGHT_EPS:
            ok = False
        if not ok:
            prunes += 1
            for u in range(d):
                arr[u, v] = 0
            par[v] = 0
            continue
        placed[k + 1] = now
        satw[k + 1] = sw
        decw[k + 1] = dw
        k += 1
        cand[k] = -1
        nxt[k] = -1
    return out[:nout].copy(), wts[:nout].copy(), outcome, nodes, prunes
