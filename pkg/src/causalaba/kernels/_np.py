"""Pure-numpy fallback kernels with the same signatures as the numba ones.

Reachability is computed with frontier vectors and boolean matrix products
instead of explicit loops, so it stays usable without a JIT.
"""

import time

import numpy as np

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


def closure(adj):
    r = np.asarray(adj, dtype=bool)
    while True:
        nxt = r | ((r.astype(np.int64) @ r.astype(np.int64)) > 0)
        if np.array_equal(nxt, r):
            return r.astype(np.uint8)
        r = nxt


def _opens(clos, inz):
    inz = np.asarray(inz, dtype=bool)
    return (inz | (clos.astype(bool) & inz[None, :]).any(axis=1)).astype(np.uint8)


def reach(arr, inz, opens, x, y):
    a = np.asarray(arr, dtype=np.int64)
    inz = np.asarray(inz, dtype=bool)
    opens = np.asarray(opens, dtype=bool)
    down_in = a[x, :] > 0  # entered along an arrow into the node
    up_in = a[:, x] > 0  # entered from a child
    seen_down = down_in.copy()
    seen_up = up_in.copy()
    while True:
        if seen_down[y] or seen_up[y]:
            return True
        pass_down = (down_in | up_in) & ~inz
        pass_up = (down_in & opens) | (up_in & ~inz)
        nd = (pass_down.astype(np.int64) @ a > 0) & ~seen_down
        nu = (a @ pass_up.astype(np.int64) > 0) & ~seen_up
        if not nd.any() and not nu.any():
            return False
        seen_down |= nd
        seen_up |= nu
        down_in, up_in = nd, nu


def dconnected(adj, x, y, inz):
    clos = closure(adj)
    return reach(adj, inz, _opens(clos, inz), x, y)


def fact_table(models, fx, fy, fz):
    nm = models.shape[0]
    nf = fx.shape[0]
    out = np.zeros((nm, nf), dtype=bool)
    for k in range(nm):
        adj = models[k]
        clos = closure(adj)
        for f in range(nf):
            out[k, f] = not reach(adj, fz[f], _opens(clos, fz[f]), fx[f], fy[f])
    return out


def _graphs(dom, pi, pj, d):
    dec = np.zeros((d, d), dtype=np.uint8)
    pos = np.zeros((d, d), dtype=np.uint8)
    fwd = (dom & FWD) > 0
    bwd = (dom & BWD) > 0
    pos[pi[fwd], pj[fwd]] = 1
    pos[pj[bwd], pi[bwd]] = 1
    dec[pi[dom == FWD], pj[dom == FWD]] = 1
    dec[pj[dom == BWD], pi[dom == BWD]] = 1
    return dec, pos


def _violated(dom, f, fx, fy, fz, fkind, pid, dec, pos, cdec, cpos):
    k = fkind[f]
    x, y = fx[f], fy[f]
    if k == K_INDEP:
        return reach(dec, fz[f], _opens(cdec, fz[f]), x, y)
    if k == K_DEP:
        return not reach(pos, fz[f], _opens(cpos, fz[f]), x, y)
    p, bit = (pid[x, y], FWD) if x < y else (pid[y, x], BWD)
    if k == K_ARROW:
        return (dom[p] & bit) == 0
    if k == K_NOEDGE:
        return (dom[p] & ABS) == 0
    return False


def _propagate(dom, pi, pj, d, pid, fx, fy, fz, fkind, fhard, fw, soft):
    while True:
        dec, pos = _graphs(dom, pi, pj, d)
        cdec = closure(dec)
        if np.diagonal(cdec).any():
            return False, 0.0
        new = dom.copy()
        new[((new & FWD) > 0) & (cdec[pj, pi] > 0)] &= ~FWD
        new[((new & BWD) > 0) & (cdec[pi, pj] > 0)] &= ~BWD
        if (new == 0).any():
            return False, 0.0
        if np.array_equal(new, dom):
            break
        dom[:] = new
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


def visited(arr, inz, opens, x):
    """Bitmask of the nodes reached by active trails from x."""
    a = np.asarray(arr, dtype=np.int64)
    inz = np.asarray(inz, dtype=bool)
    opens = np.asarray(opens, dtype=bool)
    down_in = a[x, :] > 0
    up_in = a[:, x] > 0
    seen_down = down_in.copy()
    seen_up = up_in.copy()
    while True:
        pass_down = (down_in | up_in) & ~inz
        pass_up = (down_in & opens) | (up_in & ~inz)
        nd = (pass_down.astype(np.int64) @ a > 0) & ~seen_down
        nu = (a @ pass_up.astype(np.int64) > 0) & ~seen_up
        if not nd.any() and not nu.any():
            break
        seen_down |= nd
        seen_up |= nu
        down_in, up_in = nd, nu
    return sum(1 << int(w) for w in np.flatnonzero(seen_down | seen_up))


def _bits(m):
    return [u for u in range(m.bit_length()) if (m >> u) & 1]


class _Stop(Exception):
    pass


def search(d, pi, pj, dom0, fx, fy, fz, fkind, fhard, fw, soft, cap, budget_s, find_one):
    """Same enumeration as the numba kernel, written recursively.

    Nodes are placed in the lexicographically smallest topological order of
    the DAG being built; parent sets are drawn from the placed nodes, whose
    induced subgraph is final, so facts are decided once their variables are
    placed (hard independences once their endpoints are).
    """
    npair = dom0.shape[0]
    pid = np.full((d, d), -1, dtype=np.int64)
    pid[pi, pj] = np.arange(npair)
    fx = [int(v) for v in fx]
    fy = [int(v) for v in fy]
    fz = np.asarray(fz, dtype=bool)
    nf = len(fx)
    st = {"nodes": 1, "prunes": 0, "best": -1.0, "outcome": DONE}
    models, wts = [], []
    t0 = time.perf_counter()

    dom = dom0.copy()
    ok, _ = _propagate(dom, pi, pj, d, pid, np.array(fx, np.int64), np.array(fy, np.int64), fz, fkind,
                       fhard, fw, False)
    empty = np.zeros((0, npair), dtype=np.int8)
    if not ok:
        return empty, np.zeros(0), DONE, 1, 1
    allow = np.zeros((d, d), dtype=bool)
    noedge_ok = np.zeros((d, d), dtype=bool)
    allow[pi[(dom & FWD) > 0], pj[(dom & FWD) > 0]] = True
    allow[pj[(dom & BWD) > 0], pi[(dom & BWD) > 0]] = True
    noedge_ok[pi[(dom & ABS) > 0], pj[(dom & ABS) > 0]] = True
    noedge_ok |= noedge_ok.T

    fmask = [(1 << fx[f]) | (1 << fy[f]) | sum(1 << int(v) for v in np.flatnonzero(fz[f])) for f in range(nf)]
    zmask = [sum(1 << int(v) for v in np.flatnonzero(fz[f])) for f in range(nf)]
    endpoint = [bool(fhard[f]) and fkind[f] in (K_INDEP, K_DEP) for f in range(nf)]
    total_soft = float(sum(fw[f] for f in range(nf) if not fhard[f])) if soft else 0.0
    covered = find_one and not soft and not any(fhard[f] and fkind[f] == K_ARROW for f in range(nf))
    order = []
    par = [0] * d
    arr = np.zeros((d, d), dtype=np.uint8)

    def candidate(v, placed):
        req = opt = 0
        for u in range(d):
            if u == v:
                continue
            if (placed >> u) & 1:
                if allow[u, v]:
                    if noedge_ok[u, v]:
                        opt |= 1 << u
                    else:
                        req |= 1 << u
                elif not noedge_ok[u, v]:
                    return None
            elif not allow[v, u] and not noedge_ok[v, u]:
                return None
        return req, opt

    def emit():
        bound = satw_stack[-1]
        if soft and bound > st["best"] + WEIGHT_EPS:
            st["best"] = bound
            models.clear()
            wts.clear()
        if len(models) >= cap:
            st["outcome"] = CAPPED
            raise _Stop
        row = np.empty(npair, dtype=np.int8)
        for p in range(npair):
            i, j = int(pi[p]), int(pj[p])
            row[p] = FWD if (par[j] >> i) & 1 else BWD if (par[i] >> j) & 1 else ABS
        models.append(row)
        wts.append(bound)
        if find_one:
            raise _Stop

    satw_stack = [0.0]
    decw_stack = [0.0]
    dec_stack = [frozenset()]

    def place(v, pset, placed):
        """Place v with parents pset; returns the new weights or None when a fact fails."""
        now = placed | (1 << v)
        sw, dw = satw_stack[-1], decw_stack[-1]
        dec = set(dec_stack[-1])
        clos = None
        for f in range(nf):
            m = fmask[f]
            if not (m >> v) & 1:
                continue
            if not fhard[f] and not soft:
                continue
            if not fhard[f] and fkind[f] == K_INDEP:
                if f in dec or ((1 << fx[f]) | (1 << fy[f])) & ~now:
                    continue
                if clos is None:
                    clos = closure(arr)
                if reach(arr, fz[f], _opens(clos, fz[f]), fx[f], fy[f]):
                    dw += fw[f]
                    dec.add(f)
                elif not m & ~now:
                    dw += fw[f]
                    sw += fw[f]
                    dec.add(f)
                continue
            if fhard[f] and fkind[f] == K_INDEP:
                if ((1 << fx[f]) | (1 << fy[f])) & ~now:
                    continue
            elif m & ~now:
                continue
            if endpoint[f] and not fz[f, v]:
                continue
            kind, x, y = fkind[f], fx[f], fy[f]
            if kind == K_ARROW:
                sat = bool((par[y] >> x) & 1)
            elif kind == K_NOEDGE:
                sat = not (par[y] >> x) & 1 and not (par[x] >> y) & 1
            else:
                if clos is None:
                    clos = closure(arr)
                sep = not reach(arr, fz[f], _opens(clos, fz[f]), x, y)
                sat = sep if kind == K_INDEP else not sep
            if fhard[f]:
                if not sat:
                    return None
            else:
                dw += fw[f]
                if sat:
                    sw += fw[f]
        if soft and sw + (total_soft - dw) < st["best"] - WEIGHT_EPS:
            return None
        return sw, dw, frozenset(dec)

    def level(placed):
        k = len(order)
        if k == d:
            emit()
            return
        clos_k = None
        for v in range(d):
            if (placed >> v) & 1:
                continue
            c = candidate(v, placed)
            if c is None:
                continue
            req, opt = c
            late = 0
            for q in range(k - 1, -1, -1):
                if order[q] > v:
                    late = sum(1 << u for u in order[q:])
                    break
            if late and not (req | opt) & late:
                continue
            now = placed | (1 << v)
            hits = []
            good = True
            for f in range(nf):
                if not endpoint[f] or v not in (fx[f], fy[f]):
                    continue
                need = (1 << fx[f]) | (1 << fy[f]) if fkind[f] == K_INDEP else fmask[f]
                if need & ~now or fz[f, v]:
                    continue
                if clos_k is None:
                    clos_k = closure(arr)
                other = fy[f] if fx[f] == v else fx[f]
                g = (1 << other) | (visited(arr, fz[f], _opens(clos_k, fz[f]), other) & ~zmask[f])
                if fkind[f] == K_INDEP:
                    opt &= ~g
                    if req & g:
                        good = False
                        break
                else:
                    if not (req | opt) & g:
                        good = False
                        break
                    hits.append(g)
            if not good or (late and not (req | opt) & late):
                continue
            sub = opt
            while True:
                pset = req | sub
                inverted = covered and any(pset == par[u] | (1 << u) for u in _bits(pset) if u > v)
                if (not late or pset & late) and all(pset & g for g in hits) and not inverted:
                    st["nodes"] += 1
                    if budget_s > 0 and st["nodes"] % 1024 == 0 and time.perf_counter() - t0 > budget_s:
                        st["outcome"] = TIMEOUT
                        raise _Stop
                    order.append(v)
                    par[v] = pset
                    for u in _bits(pset):
                        arr[u, v] = 1
                    w = place(v, pset, placed)
                    if w is None:
                        st["prunes"] += 1
                    else:
                        satw_stack.append(w[0])
                        decw_stack.append(w[1])
                        dec_stack.append(w[2])
                        try:
                            level(now)
                        finally:
                            satw_stack.pop()
                            decw_stack.pop()
                            dec_stack.pop()
                    arr[:, v] = 0
                    par[v] = 0
                    order.pop()
                if sub == 0:
                    break
                sub = (sub - 1) & opt

    try:
        level(0)
    except _Stop:
        pass
    states = np.array(models, dtype=np.int8).reshape(len(models), npair)
    return states, np.array(wts, dtype=np.float64), st["outcome"], st["nodes"], st["prunes"]
