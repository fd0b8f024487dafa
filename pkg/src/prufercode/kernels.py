"""Hot numeric kernels with two execution lanes.

Every function here is written in the numba-compatible numpy subset.  By
default the module compiles them with ``numba.njit``; setting the environment
variable ``PRUFERCODE_NO_NUMBA=1`` (before import) keeps them as plain numpy
functions.  Both lanes execute the same statements in the same order, so they
agree to floating-point roundoff; ``benchmarks/bench_lanes.py`` compares their
speed.

Kernels:
  * Prufer codec on integer arrays (encode to a sequence, decode to a parent
    table).
  * Fused forward / forward-backward / greedy-decode passes of the
    dual-encoder GRU summarization model.  The readable reference ops live in
    ``model.py``; tests assert the fused passes match them.
"""

from __future__ import annotations

import os

import numpy as np


def _env_disables_numba() -> bool:
    flag = os.environ.get("PRUFERCODE_NO_NUMBA", "").strip().lower()
    return flag in ("1", "true", "yes", "on")


if _env_disables_numba():
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

LANE = "numba" if NUMBA_ENABLED else "numpy"

if NUMBA_ENABLED:
    from numba import njit as _njit

    def jit(fn):
        return _njit(cache=True)(fn)

else:

    def jit(fn):
        return fn


# ---------------------------------------------------------------------------
# Prufer codec kernels
# ---------------------------------------------------------------------------


@jit
def _adjacency_csr(parents, n):
    """CSR adjacency (offsets, flat neighbor list) of the undirected skeleton."""
    cnt = np.zeros(n + 1, np.int64)
    for v in range(2, n + 1):
        cnt[v] += 1
        cnt[parents[v]] += 1
    off = np.zeros(n + 2, np.int64)
    for v in range(1, n + 1):
        off[v + 1] = off[v] + cnt[v]
    cur = off[: n + 1].copy()
    adj = np.empty(2 * (n - 1), np.int64)
    for v in range(2, n + 1):
        p = parents[v]
        adj[cur[v]] = p
        cur[v] += 1
        adj[cur[p]] = v
        cur[p] += 1
    return off, adj


@jit
def _orient_toward(off, adj, n, root):
    """Parent table pointing every node toward ``root`` (DFS, iterative)."""
    par = np.zeros(n + 1, np.int64)
    visited = np.zeros(n + 1, np.bool_)
    stack = np.empty(n, np.int64)
    stack[0] = root
    visited[root] = True
    sp = 1
    while sp > 0:
        sp -= 1
        v = stack[sp]
        for k in range(off[v], off[v + 1]):
            w = adj[k]
            if not visited[w]:
                visited[w] = True
                par[w] = v
                stack[sp] = w
                sp += 1
    return par


@jit
def prufer_encode_kernel(parents, n):
    """Prufer sequence of the skeleton described by a root-at-1 parent table.

    Classical construction: repeatedly delete the leaf with the smallest id
    and record its unique remaining neighbor.  Implemented with the linear
    pointer scan; the O(n^2) restatement of the definition serves as the test
    oracle.
    """
    seq = np.empty(max(n - 2, 0), np.int64)
    if n <= 2:
        return seq
    deg = np.zeros(n + 1, np.int64)
    for v in range(2, n + 1):
        deg[v] += 1
        deg[parents[v]] += 1
    off, adj = _adjacency_csr(parents, n)
    # Node n is never the smallest leaf, so orienting every edge toward n
    # makes par[leaf] the remaining neighbor of any deleted leaf.
    par = _orient_toward(off, adj, n, n)
    ptr = 1
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        nxt = par[leaf]
        seq[i] = nxt
        deg[leaf] -= 1
        deg[nxt] -= 1
        if deg[nxt] == 1 and nxt < ptr:
            leaf = nxt
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    return seq


@jit
def prufer_decode_kernel(seq, n):
    """Root-at-1 parent table of the tree encoded by ``seq`` over [1, n].

    Inverse construction: degrees are occurrence counts plus one; repeatedly
    attach the smallest-id leaf to the sequence head; the final edge joins the
    last leaf to node n.
    """
    parents = np.zeros(n + 1, np.int64)
    if n == 2:
        parents[2] = 1
        return parents
    deg = np.ones(n + 1, np.int64)
    deg[0] = 0
    for i in range(seq.shape[0]):
        deg[seq[i]] += 1
    eu = np.empty(n - 1, np.int64)
    ev = np.empty(n - 1, np.int64)
    ptr = 1
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        v = seq[i]
        eu[i] = leaf
        ev[i] = v
        deg[leaf] -= 1
        deg[v] -= 1
        if deg[v] == 1 and v < ptr:
            leaf = v
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    eu[n - 2] = leaf
    ev[n - 2] = n
    # Root the edge list at node 1.
    cnt = np.zeros(n + 1, np.int64)
    for i in range(n - 1):
        cnt[eu[i]] += 1
        cnt[ev[i]] += 1
    off = np.zeros(n + 2, np.int64)
    for v in range(1, n + 1):
        off[v + 1] = off[v] + cnt[v]
    cur = off[: n + 1].copy()
    adj = np.empty(2 * (n - 1), np.int64)
    for i in range(n - 1):
        a = eu[i]
        b = ev[i]
        adj[cur[a]] = b
        cur[a] += 1
        adj[cur[b]] = a
        cur[b] += 1
    par = _orient_toward(off, adj, n, 1)
    for v in range(2, n + 1):
        parents[v] = par[v]
    return parents


# ---------------------------------------------------------------------------
# Model kernels
# ---------------------------------------------------------------------------


@jit
def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@jit
def _gru_cell(W, b, x, s_prev):
    """One GRU step.  W is the (reset, update, candidate) stack (3, H, E+H)."""
    xs = np.concatenate((x, s_prev))
    r = _sigmoid(np.dot(W[0], xs) + b[0])
    z = _sigmoid(np.dot(W[1], xs) + b[1])
    xrs = np.concatenate((x, r * s_prev))
    hc = np.tanh(np.dot(W[2], xrs) + b[2])
    s = (1.0 - z) * s_prev + z * hc
    return r, z, hc, s


@jit
def _encoder_forward(X, W, b):
    """Run a GRU over embedded inputs X (T, E) from a zero initial state.

    Returns all states S with S[0] = 0 plus the gate caches needed by the
    backward pass.
    """
    T = X.shape[0]
    H = b.shape[1]
    S = np.zeros((T + 1, H))
    R = np.empty((T, H))
    Z = np.empty((T, H))
    HC = np.empty((T, H))
    for t in range(T):
        r, z, hc, s = _gru_cell(W, b, X[t], S[t])
        R[t] = r
        Z[t] = z
        HC[t] = hc
        S[t + 1] = s
    return S, R, Z, HC


@jit
def _gru_cell_backward(W, x, s_prev, r, z, hc, ds, gW, gb):
    """Backward through one GRU step; accumulates into gW/gb, returns (dx, ds_prev)."""
    E = x.shape[0]
    dz = ds * (hc - s_prev)
    dhc = ds * z
    ds_prev = ds * (1.0 - z)
    da_h = dhc * (1.0 - hc * hc)
    xrs = np.concatenate((x, r * s_prev))
    gW[2] += da_h[:, None] * xrs[None, :]
    gb[2] += da_h
    dxrs = np.dot(da_h, W[2])
    dx = dxrs[:E].copy()
    drs = dxrs[E:]
    dr = drs * s_prev
    ds_prev = ds_prev + drs * r
    da_r = dr * r * (1.0 - r)
    da_z = dz * z * (1.0 - z)
    xs = np.concatenate((x, s_prev))
    gW[0] += da_r[:, None] * xs[None, :]
    gb[0] += da_r
    gW[1] += da_z[:, None] * xs[None, :]
    gb[1] += da_z
    dxs = np.dot(da_r, W[0]) + np.dot(da_z, W[1])
    dx += dxs[:E]
    ds_prev = ds_prev + dxs[E:]
    return dx, ds_prev


@jit
def _attention_forward(q, S, Wa, va):
    """Additive attention of query q over states S (T, H).

    score_i = va . tanh(Wa @ [q; S_i]); weights = softmax(scores);
    returns (context, weights, tanh cache).
    """
    T = S.shape[0]
    H = q.shape[0]
    U = np.empty((T, H))
    e = np.empty(T)
    for i in range(T):
        qs = np.concatenate((q, S[i]))
        u = np.tanh(np.dot(Wa, qs))
        U[i] = u
        e[i] = np.dot(va, u)
    m = e[0]
    for i in range(1, T):
        if e[i] > m:
            m = e[i]
    a = np.exp(e - m)
    a = a / a.sum()
    ctx = np.dot(a, S)
    return ctx, a, U


@jit
def _attention_backward(q, S, Wa, va, a, U, dctx, dS_acc, gWa, gva):
    """Backward through additive attention; accumulates state grads into dS_acc."""
    T = S.shape[0]
    H = q.shape[0]
    dalpha = np.dot(S, dctx)
    for i in range(T):
        dS_acc[i] += a[i] * dctx
    de = a * (dalpha - np.dot(a, dalpha))
    dq = np.zeros(H)
    for i in range(T):
        gva += de[i] * U[i]
        du = de[i] * va
        dpre = du * (1.0 - U[i] * U[i])
        qs = np.concatenate((q, S[i]))
        gWa += dpre[:, None] * qs[None, :]
        dqs = np.dot(dpre, Wa)
        dq += dqs[:H]
        dS_acc[i] += dqs[H:]
    return dq


@jit
def _decode_core(s, Sp, Sc, use_context, Wa_p, va_p, Wa_c, va_c, Wm, Wo, bo):
    """Attention + combiner + output projection for one decoder state."""
    ctx_p, a_p, U_p = _attention_forward(s, Sp, Wa_p, va_p)
    if use_context:
        ctx_c, a_c, U_c = _attention_forward(s, Sc, Wa_c, va_c)
        mi = np.concatenate((ctx_p, ctx_c))
    else:
        ctx_c = np.zeros(0)
        a_c = np.zeros(0)
        U_c = np.zeros((0, s.shape[0]))
        mi = ctx_p
    m = np.tanh(np.dot(Wm, mi))
    oc = np.concatenate((s, m))
    logits = np.dot(Wo, oc) + bo
    return logits, m, ctx_p, a_p, U_p, ctx_c, a_c, U_c


@jit
def model_loss_kernel(
    p_ids, c_ids, d_in, d_tgt, use_context,
    emb_p, emb_c, emb_t,
    Wg_p, bg_p, Wg_c, bg_c, Wg_d, bg_d,
    Wa_p, va_p, Wa_c, va_c,
    Wm, Wo, bo,
):
    """Teacher-forced mean cross-entropy over one example; also counts argmax hits."""
    Sp, _, _, _ = _encoder_forward(emb_p[p_ids], Wg_p, bg_p)
    Sp_states = Sp[1:]
    if use_context:
        Sc, _, _, _ = _encoder_forward(emb_c[c_ids], Wg_c, bg_c)
        Sc_states = Sc[1:]
    else:
        Sc_states = np.zeros((1, bg_p.shape[1]))
    L = d_in.shape[0]
    H = bg_d.shape[1]
    s = np.zeros(H)
    total = 0.0
    ncorrect = 0
    for t in range(L):
        _, _, _, s = _gru_cell(Wg_d, bg_d, emb_t[d_in[t]], s)
        logits, _, _, _, _, _, _, _ = _decode_core(
            s, Sp_states, Sc_states, use_context, Wa_p, va_p, Wa_c, va_c, Wm, Wo, bo
        )
        mx = logits[0]
        arg = 0
        for v in range(1, logits.shape[0]):
            if logits[v] > mx:
                mx = logits[v]
                arg = v
        lse = mx + np.log(np.sum(np.exp(logits - mx)))
        total += lse - logits[d_tgt[t]]
        if arg == d_tgt[t]:
            ncorrect += 1
    return total / L, ncorrect


@jit
def model_loss_grad_kernel(
    p_ids, c_ids, d_in, d_tgt, use_context,
    emb_p, emb_c, emb_t,
    Wg_p, bg_p, Wg_c, bg_c, Wg_d, bg_d,
    Wa_p, va_p, Wa_c, va_c,
    Wm, Wo, bo,
    g_emb_p, g_emb_c, g_emb_t,
    gWg_p, gbg_p, gWg_c, gbg_c, gWg_d, gbg_d,
    gWa_p, gva_p, gWa_c, gva_c,
    gWm, gWo, gbo,
):
    """Fused forward + exact reverse-mode backward for one example.

    Gradients are accumulated into the g* buffers (callers zero them).
    Returns (mean loss, argmax hit count).
    """
    H = bg_d.shape[1]
    E = emb_t.shape[1]
    V = bo.shape[0]
    Tp = p_ids.shape[0]
    L = d_in.shape[0]

    # ---- forward with caches ----
    Xp = emb_p[p_ids]
    Sp, Rp, Zp, HCp = _encoder_forward(Xp, Wg_p, bg_p)
    Sp_states = Sp[1:]
    if use_context:
        Tc = c_ids.shape[0]
        Xc = emb_c[c_ids]
        Sc, Rc, Zc, HCc = _encoder_forward(Xc, Wg_c, bg_c)
        Sc_states = Sc[1:]
    else:
        Tc = 1
        Xc = np.zeros((1, E))
        Sc = np.zeros((2, H))
        Rc = np.zeros((1, H))
        Zc = np.zeros((1, H))
        HCc = np.zeros((1, H))
        Sc_states = np.zeros((1, H))

    Xd = emb_t[d_in]
    Sd = np.zeros((L + 1, H))
    Rd = np.empty((L, H))
    Zd = np.empty((L, H))
    HCd = np.empty((L, H))
    AlP = np.empty((L, Tp))
    UP = np.empty((L, Tp, H))
    AlC = np.empty((L, Tc))
    UC = np.empty((L, Tc, H))
    CtxP = np.empty((L, H))
    CtxC = np.empty((L, H))
    M = np.empty((L, H))
    Probs = np.empty((L, V))
    total = 0.0
    ncorrect = 0
    for t in range(L):
        r, z, hc, s = _gru_cell(Wg_d, bg_d, Xd[t], Sd[t])
        Rd[t] = r
        Zd[t] = z
        HCd[t] = hc
        Sd[t + 1] = s
        logits, m, ctx_p, a_p, U_p, ctx_c, a_c, U_c = _decode_core(
            s, Sp_states, Sc_states, use_context, Wa_p, va_p, Wa_c, va_c, Wm, Wo, bo
        )
        M[t] = m
        CtxP[t] = ctx_p
        AlP[t] = a_p
        UP[t] = U_p
        if use_context:
            CtxC[t] = ctx_c
            AlC[t] = a_c
            UC[t] = U_c
        mx = logits[0]
        arg = 0
        for v in range(1, V):
            if logits[v] > mx:
                mx = logits[v]
                arg = v
        ex = np.exp(logits - mx)
        zsum = ex.sum()
        Probs[t] = ex / zsum
        total += mx + np.log(zsum) - logits[d_tgt[t]]
        if arg == d_tgt[t]:
            ncorrect += 1

    # ---- backward ----
    dSp_acc = np.zeros((Tp, H))
    dSc_acc = np.zeros((Tc, H))
    ds_carry = np.zeros(H)
    for t in range(L - 1, -1, -1):
        s = Sd[t + 1]
        dlogits = Probs[t].copy()
        dlogits[d_tgt[t]] -= 1.0
        dlogits /= L
        oc = np.concatenate((s, M[t]))
        gWo += dlogits[:, None] * oc[None, :]
        gbo += dlogits
        doc = np.dot(dlogits, Wo)
        ds = doc[:H].copy()
        dm = doc[H:]
        dm_pre = dm * (1.0 - M[t] * M[t])
        if use_context:
            mi = np.concatenate((CtxP[t], CtxC[t]))
        else:
            mi = CtxP[t]
        gWm += dm_pre[:, None] * mi[None, :]
        dmi = np.dot(dm_pre, Wm)
        dctx_p = dmi[:H]
        ds += _attention_backward(
            s, Sp_states, Wa_p, va_p, AlP[t], UP[t], dctx_p, dSp_acc, gWa_p, gva_p
        )
        if use_context:
            dctx_c = dmi[H:]
            ds += _attention_backward(
                s, Sc_states, Wa_c, va_c, AlC[t], UC[t], dctx_c, dSc_acc, gWa_c, gva_c
            )
        ds += ds_carry
        dx, ds_carry = _gru_cell_backward(
            Wg_d, Xd[t], Sd[t], Rd[t], Zd[t], HCd[t], ds, gWg_d, gbg_d
        )
        g_emb_t[d_in[t]] += dx

    ds = np.zeros(H)
    for t in range(Tp - 1, -1, -1):
        ds += dSp_acc[t]
        dx, ds = _gru_cell_backward(
            Wg_p, Xp[t], Sp[t], Rp[t], Zp[t], HCp[t], ds, gWg_p, gbg_p
        )
        g_emb_p[p_ids[t]] += dx
    if use_context:
        ds = np.zeros(H)
        for t in range(Tc - 1, -1, -1):
            ds += dSc_acc[t]
            dx, ds = _gru_cell_backward(
                Wg_c, Xc[t], Sc[t], Rc[t], Zc[t], HCc[t], ds, gWg_c, gbg_c
            )
            g_emb_c[c_ids[t]] += dx

    return total / L, ncorrect


@jit
def model_greedy_kernel(
    p_ids, c_ids, use_context, start_id, eos_id, max_len,
    emb_p, emb_c, emb_t,
    Wg_p, bg_p, Wg_c, bg_c, Wg_d, bg_d,
    Wa_p, va_p, Wa_c, va_c,
    Wm, Wo, bo,
):
    """Greedy decode: argmax each step (ties -> smallest id), stop at EOS or max_len."""
    Sp, _, _, _ = _encoder_forward(emb_p[p_ids], Wg_p, bg_p)
    Sp_states = Sp[1:]
    if use_context:
        Sc, _, _, _ = _encoder_forward(emb_c[c_ids], Wg_c, bg_c)
        Sc_states = Sc[1:]
    else:
        Sc_states = np.zeros((1, bg_p.shape[1]))
    H = bg_d.shape[1]
    s = np.zeros(H)
    out = np.empty(max(max_len, 0), np.int64)
    count = 0
    prev = start_id
    for _ in range(max_len):
        _, _, _, s = _gru_cell(Wg_d, bg_d, emb_t[prev], s)
        logits, _, _, _, _, _, _, _ = _decode_core(
            s, Sp_states, Sc_states, use_context, Wa_p, va_p, Wa_c, va_c, Wm, Wo, bo
        )
        tok = 0
        mx = logits[0]
        for v in range(1, logits.shape[0]):
            if logits[v] > mx:
                mx = logits[v]
                tok = v
        if tok == eos_id:
            break
        out[count] = tok
        count += 1
        prev = tok
    return out[:count]
