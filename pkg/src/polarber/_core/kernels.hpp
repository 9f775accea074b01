// Hot kernels: exact lattice transforms, outward-rounded grid steps and a
// batched successive-cancellation decoder. Mirrors polarber/_pykernels.py.
#pragma once

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

namespace pbk {

// RAII wrapper; vectors of these are the only big-integer containers here.
struct Z {
    mpz_t v;
    Z() { mpz_init(v); }
    ~Z() { mpz_clear(v); }
    Z(const Z& o) { mpz_init_set(v, o.v); }
    Z(Z&& o) noexcept { mpz_init(v); mpz_swap(v, o.v); }
    Z& operator=(const Z& o) { mpz_set(v, o.v); return *this; }
    Z& operator=(Z&& o) noexcept { mpz_swap(v, o.v); return *this; }
};

using ZVec = std::vector<Z>;

// ------------------------------------------------------------------ lattice

static const long double CLUSTER_TOL = 1e-10L;

struct Child {
    long double key;  // approximate B/A of the child
    uint64_t code;    // i << 32 | j << 2 | kind
};

inline uint64_t pack(uint64_t i, uint64_t j, uint64_t kind) { return (i << 32) | (j << 2) | kind; }

// B/A as long double (about 1e-15 relative accuracy)
inline long double ratio_key(const mpz_t a, const mpz_t b) {
    if (mpz_sgn(b) == 0) return 0.0L;
    long ea, eb;
    double ma = mpz_get_d_2exp(&ea, a);
    double mb = mpz_get_d_2exp(&eb, b);
    return std::ldexp((long double)mb / (long double)ma, (int)(eb - ea));
}

struct Lattice {
    const ZVec& A;
    const ZVec& B;
    std::vector<long double> r;
    Z t1, t2;

    Lattice(const ZVec& A_, const ZVec& B_) : A(A_), B(B_), r(A_.size()) {
        for (size_t i = 0; i < A.size(); ++i) {
            r[i] = ratio_key(A[i].v, B[i].v);
            if (r[i] != 0.0L && r[i] < 1e-4000L)
                throw std::range_error("lattice key underflow");
        }
    }

    void children(bool minus, std::vector<Child>& out) const {
        size_t p = A.size();
        out.clear();
        out.reserve(minus ? p * (p + 1) / 2 : p * p + p);
        for (size_t i = 0; i < p; ++i) {
            long double ri = r[i];
            for (size_t j = i; j < p; ++j) {
                long double rj = r[j];
                if (minus) {
                    out.push_back({(ri + rj) / (1.0L + ri * rj), pack(i, j, 0)});
                } else {
                    out.push_back({ri * rj, pack(i, j, 1)});
                    if (ri > 0.0L) {
                        if (j > i)
                            out.push_back({rj / ri, pack(i, j, 2)});
                        else
                            out.push_back({1.0L, pack(i, j, 3)});
                    }
                }
            }
        }
    }

    // exact child value
    void value(uint64_t code, mpz_t ca, mpz_t cb) {
        size_t i = code >> 32, j = (code >> 2) & 0x3fffffff;
        int kind = code & 3;
        const mpz_t &ai = A[i].v, &bi = B[i].v, &aj = A[j].v, &bj = B[j].v;
        switch (kind) {
            case 0:
                mpz_mul(ca, ai, aj);
                mpz_addmul(ca, bi, bj);
                mpz_mul(cb, ai, bj);
                mpz_addmul(cb, bi, aj);
                break;
            case 1:
                mpz_mul(ca, ai, aj);
                mpz_mul(cb, bi, bj);
                break;
            case 2:
                mpz_mul(ca, bi, aj);
                mpz_mul(cb, ai, bj);
                break;
            default:
                mpz_mul(ca, ai, bi);
                mpz_set(cb, ca);
                return;
        }
        if (i != j) {
            mpz_mul_2exp(ca, ca, 1);
            mpz_mul_2exp(cb, cb, 1);
        }
    }
};

// Visit children in ascending theta order; visit(ca, cb) gets exact values.
template <class Visit>
void sorted_children(const ZVec& A, const ZVec& B, bool minus, Visit visit) {
    if (A.empty()) return;
    Lattice lat(A, B);
    std::vector<Child> ch;
    lat.children(minus, ch);
    std::sort(ch.begin(), ch.end(), [](const Child& x, const Child& y) {
        if (x.key != y.key) return x.key > y.key;
        return x.code < y.code;
    });
    ZVec ca(1), cb(1);
    ZVec va, vb;
    std::vector<size_t> idx;
    Z l, rgt;
    size_t n = ch.size(), s = 0;
    while (s < n) {
        size_t e = s + 1;
        while (e < n && ch[e - 1].key - ch[e].key <= CLUSTER_TOL * ch[e - 1].key) ++e;
        if (e - s == 1) {
            lat.value(ch[s].code, ca[0].v, cb[0].v);
            visit(ca[0].v, cb[0].v);
        } else {
            size_t c = e - s;
            va.resize(c);
            vb.resize(c);
            idx.resize(c);
            for (size_t k = 0; k < c; ++k) {
                lat.value(ch[s + k].code, va[k].v, vb[k].v);
                idx[k] = k;
            }
            // descending B/A: x first when B_x A_y > B_y A_x
            std::stable_sort(idx.begin(), idx.end(), [&](size_t x, size_t y) {
                mpz_mul(l.v, vb[x].v, va[y].v);
                mpz_mul(rgt.v, vb[y].v, va[x].v);
                return mpz_cmp(l.v, rgt.v) > 0;
            });
            for (size_t k = 0; k < c; ++k) visit(va[idx[k]].v, vb[idx[k]].v);
        }
        s = e;
    }
}

inline void lattice_step(const ZVec& A, const ZVec& B, bool minus, ZVec& oA, ZVec& oB) {
    oA.clear();
    oB.clear();
    Z l, r;
    sorted_children(A, B, minus, [&](const mpz_t ca, const mpz_t cb) {
        if (mpz_sgn(ca) == 0) return;
        if (!oA.empty()) {
            mpz_mul(l.v, oB.back().v, ca);
            mpz_mul(r.v, cb, oA.back().v);
            if (mpz_cmp(l.v, r.v) == 0) {
                mpz_add(oA.back().v, oA.back().v, ca);
                mpz_add(oB.back().v, oB.back().v, cb);
                return;
            }
        }
        oA.emplace_back();
        oB.emplace_back();
        mpz_set(oA.back().v, ca);
        mpz_set(oB.back().v, cb);
    });
}

inline void lattice_leaf_plus(const ZVec& A, const ZVec& B, bool minus, mpz_t result) {
    Z tau, mass, diff;
    mpz_set_ui(result, 0);
    sorted_children(A, B, minus, [&](const mpz_t ca, const mpz_t cb) {
        mpz_add(mass.v, ca, cb);
        mpz_sub(diff.v, ca, cb);
        mpz_add(tau.v, tau.v, mass.v);
        mpz_addmul(result, diff.v, tau.v);
        mpz_add(tau.v, tau.v, mass.v);
    });
}

// --------------------------------------------------------------------- grid

struct ThetaMass {
    Z t, m;
};

inline void grid_children(const ZVec& m, const ZVec& t, unsigned K, bool minus, bool down,
                          ZVec& om, ZVec& ot) {
    size_t n = m.size();
    std::vector<ThetaMass> out;
    out.reserve(minus ? n * (n + 1) / 2 : n * (n + 1));
    Z T, T2, w, p, den, mass, num, total;
    mpz_set_ui(T.v, 1);
    mpz_mul_2exp(T.v, T.v, K);
    mpz_set_ui(T2.v, 1);
    mpz_mul_2exp(T2.v, T2.v, 2 * K);
    unsigned K2 = 2 * K, K3 = 3 * K + 1;
    auto emit = [&](const mpz_t th) {
        out.emplace_back();
        mpz_set(out.back().t.v, th);
        mpz_set(out.back().m.v, mass.v);
        mpz_add(total.v, total.v, mass.v);
    };
    Z th;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            mpz_mul(w.v, m[i].v, m[j].v);
            if (j > i) mpz_mul_2exp(w.v, w.v, 1);
            mpz_mul(p.v, t[i].v, t[j].v);
            if (minus) {
                mpz_fdiv_q_2exp(mass.v, w.v, K);
                if (mpz_sgn(mass.v) == 0) continue;
                if (down)
                    mpz_fdiv_q_2exp(th.v, p.v, K);
                else
                    mpz_cdiv_q_2exp(th.v, p.v, K);
                emit(th.v);
                continue;
            }
            // u = 0
            mpz_add(den.v, T2.v, p.v);
            mpz_mul(mass.v, w.v, den.v);
            mpz_fdiv_q_2exp(mass.v, mass.v, K3);
            if (mpz_sgn(mass.v) != 0) {
                mpz_add(num.v, t[i].v, t[j].v);
                mpz_mul_2exp(num.v, num.v, K2);
                if (down)
                    mpz_fdiv_q(th.v, num.v, den.v);
                else
                    mpz_cdiv_q(th.v, num.v, den.v);
                emit(th.v);
            }
            // u = 1
            mpz_sub(den.v, T2.v, p.v);
            if (mpz_sgn(den.v) == 0) continue;
            mpz_mul(mass.v, w.v, den.v);
            mpz_fdiv_q_2exp(mass.v, mass.v, K3);
            if (mpz_sgn(mass.v) != 0) {
                mpz_sub(num.v, t[j].v, t[i].v);
                mpz_abs(num.v, num.v);
                mpz_mul_2exp(num.v, num.v, K2);
                if (down)
                    mpz_fdiv_q(th.v, num.v, den.v);
                else
                    mpz_cdiv_q(th.v, num.v, den.v);
                emit(th.v);
            }
        }
    }
    mpz_sub(mass.v, T.v, total.v);
    if (mpz_sgn(mass.v) != 0) {
        if (down)
            mpz_set_ui(th.v, 0);
        else
            mpz_set(th.v, T.v);
        emit(th.v);
    }
    std::vector<uint32_t> idx(out.size());
    for (size_t k = 0; k < idx.size(); ++k) idx[k] = (uint32_t)k;
    std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        int c = mpz_cmp(out[a].t.v, out[b].t.v);
        return c != 0 ? c < 0 : a < b;
    });
    om.clear();
    ot.clear();
    for (uint32_t k : idx) {
        if (!ot.empty() && mpz_cmp(ot.back().v, out[k].t.v) == 0) {
            mpz_add(om.back().v, om.back().v, out[k].m.v);
        } else {
            om.emplace_back(std::move(out[k].m));
            ot.emplace_back(std::move(out[k].t));
        }
    }
}

struct HeapItem {
    uint32_t slot;  // key storage slot
    int32_t node;
    uint32_t version;
};

// Min-heap of big-integer keys with node-index tie break.
class KeyHeap {
  public:
    ZVec keys;
    std::vector<uint32_t> free_slots;
    std::vector<HeapItem> heap;

    uint32_t alloc() {
        if (!free_slots.empty()) {
            uint32_t s = free_slots.back();
            free_slots.pop_back();
            return s;
        }
        keys.emplace_back();
        return (uint32_t)(keys.size() - 1);
    }
    bool less(const HeapItem& a, const HeapItem& b) const {
        int c = mpz_cmp(keys[a.slot].v, keys[b.slot].v);
        return c != 0 ? c < 0 : a.node < b.node;
    }
    void push(HeapItem it) {
        heap.push_back(it);
        size_t k = heap.size() - 1;
        while (k > 0) {
            size_t par = (k - 1) / 2;
            if (!less(heap[k], heap[par])) break;
            std::swap(heap[k], heap[par]);
            k = par;
        }
    }
    void heapify() {
        for (size_t k = heap.size() / 2; k-- > 0;) sift_down(k);
    }
    void sift_down(size_t k) {
        size_t n = heap.size();
        while (true) {
            size_t l = 2 * k + 1, r = l + 1, best = k;
            if (l < n && less(heap[l], heap[best])) best = l;
            if (r < n && less(heap[r], heap[best])) best = r;
            if (best == k) return;
            std::swap(heap[k], heap[best]);
            k = best;
        }
    }
    HeapItem pop() {
        HeapItem top = heap.front();
        heap.front() = heap.back();
        heap.pop_back();
        if (!heap.empty()) sift_down(0);
        free_slots.push_back(top.slot);
        return top;
    }
};

inline void grid_degrade(ZVec& m, ZVec& t, size_t Q) {
    size_t C = m.size();
    if (C <= Q) return;
    std::vector<int32_t> nxt(C), prv(C);
    std::vector<uint32_t> version(C, 0);
    std::vector<char> alive(C, 1);
    for (size_t k = 0; k < C; ++k) {
        nxt[k] = k + 1 < C ? (int32_t)(k + 1) : -1;
        prv[k] = (int32_t)k - 1;
    }
    KeyHeap h;
    Z diff;
    auto set_key = [&](uint32_t slot, int32_t a, int32_t b) {
        mpz_sub(diff.v, t[b].v, t[a].v);
        mpz_mul(h.keys[slot].v, m[a].v, m[b].v);
        mpz_mul(h.keys[slot].v, h.keys[slot].v, diff.v);
    };
    h.keys.resize(C - 1);
    for (size_t k = 0; k + 1 < C; ++k) {
        set_key((uint32_t)k, (int32_t)k, (int32_t)k + 1);
        h.heap.push_back({(uint32_t)k, (int32_t)k, 0});
    }
    h.heapify();
    size_t size = C;
    Z num;
    while (size > Q) {
        HeapItem it = h.pop();
        int32_t j = it.node;
        if (!alive[j] || it.version != version[j] || nxt[j] < 0) continue;
        int32_t k = nxt[j];
        mpz_mul(num.v, m[j].v, t[j].v);
        mpz_addmul(num.v, m[k].v, t[k].v);
        mpz_add(m[j].v, m[j].v, m[k].v);
        mpz_fdiv_q(t[j].v, num.v, m[j].v);
        alive[k] = 0;
        nxt[j] = nxt[k];
        if (nxt[k] >= 0) prv[nxt[k]] = j;
        --size;
        ++version[j];
        if (nxt[j] >= 0) {
            uint32_t s = h.alloc();
            set_key(s, j, nxt[j]);
            h.push({s, j, version[j]});
        }
        int32_t p = prv[j];
        if (p >= 0) {
            ++version[p];
            uint32_t s = h.alloc();
            set_key(s, p, j);
            h.push({s, p, version[p]});
        }
    }
    ZVec om, ot;
    for (int32_t j = 0; j >= 0; j = nxt[j]) {
        om.emplace_back(std::move(m[j]));
        ot.emplace_back(std::move(t[j]));
    }
    m.swap(om);
    t.swap(ot);
}

inline void grid_upgrade(ZVec& m, ZVec& t, size_t Q, unsigned K) {
    size_t C = m.size();
    if (C <= Q) return;
    std::vector<int32_t> nxt(C), prv(C);
    std::vector<uint32_t> version(C, 0);
    std::vector<char> alive(C, 1);
    for (size_t k = 0; k < C; ++k) {
        nxt[k] = k + 1 < C ? (int32_t)(k + 1) : -1;
        prv[k] = (int32_t)k - 1;
    }
    unsigned S = 2 * K + 1;
    KeyHeap h;
    Z a, b, num, den;
    auto set_key = [&](uint32_t slot, int32_t v) {
        mpz_sub(a.v, t[v].v, t[prv[v]].v);
        mpz_sub(b.v, t[nxt[v]].v, t[v].v);
        mpz_mul(num.v, m[v].v, m[v].v);
        mpz_mul(num.v, num.v, a.v);
        mpz_mul(num.v, num.v, b.v);
        mpz_mul_2exp(num.v, num.v, S);
        mpz_add(den.v, a.v, b.v);
        mpz_fdiv_q(h.keys[slot].v, num.v, den.v);
    };
    h.keys.resize(C - 2);
    for (size_t v = 1; v + 1 < C; ++v) {
        set_key((uint32_t)(v - 1), (int32_t)v);
        h.heap.push_back({(uint32_t)(v - 1), (int32_t)v, 0});
    }
    h.heapify();
    size_t size = C;
    Z to_prev;
    while (size > Q) {
        HeapItem it = h.pop();
        int32_t v = it.node;
        if (!alive[v] || it.version != version[v]) continue;
        int32_t p = prv[v], q = nxt[v];
        mpz_sub(a.v, t[q].v, t[v].v);
        mpz_mul(num.v, m[v].v, a.v);
        mpz_sub(den.v, t[q].v, t[p].v);
        mpz_fdiv_q(to_prev.v, num.v, den.v);
        mpz_add(m[p].v, m[p].v, to_prev.v);
        mpz_sub(m[v].v, m[v].v, to_prev.v);
        mpz_add(m[q].v, m[q].v, m[v].v);
        alive[v] = 0;
        nxt[p] = q;
        prv[q] = p;
        --size;
        for (int32_t w : {p, q}) {
            ++version[w];
            if (prv[w] >= 0 && nxt[w] >= 0) {
                uint32_t s = h.alloc();
                set_key(s, w);
                h.push({s, w, version[w]});
            }
        }
    }
    ZVec om, ot;
    for (int32_t j = 0; j >= 0; j = nxt[j]) {
        om.emplace_back(std::move(m[j]));
        ot.emplace_back(std::move(t[j]));
    }
    m.swap(om);
    t.swap(ot);
}

inline void grid_quantize(ZVec& m, ZVec& t, unsigned K, bool down, size_t Q, bool pin) {
    Z one;
    mpz_set_ui(one.v, 1);
    mpz_mul_2exp(one.v, one.v, K);
    bool pinned = false;
    Z pm, pt;
    if (pin && !t.empty() && mpz_cmp(t.back().v, one.v) == 0) {
        pinned = true;
        pm = std::move(m.back());
        pt = std::move(t.back());
        m.pop_back();
        t.pop_back();
    }
    if (down)
        grid_degrade(m, t, Q);
    else
        grid_upgrade(m, t, Q, K);
    if (pinned) {
        m.emplace_back(std::move(pm));
        t.emplace_back(std::move(pt));
    }
}

inline void grid_step(const ZVec& m, const ZVec& t, unsigned K, bool minus, bool down, size_t Q,
                      bool pin, ZVec& om, ZVec& ot) {
    grid_children(m, t, K, minus, down, om, ot);
    grid_quantize(om, ot, K, down, Q, pin);
}

// ------------------------------------------------------------------ decoder

// Recursive SC on one block. th has n entries; scratch needs 2n doubles.
// x receives the re-encoded block. Decisions and genie errors are written
// at offset lo.
struct SCJob {
    const uint8_t* frozen_mask;
    const uint8_t* frozen_vals;  // may be null
    const uint8_t* truth;        // may be null
    bool genie;
    uint8_t* u;
    int64_t* errors;
};

inline void sc_rec(const SCJob& job, const double* th, size_t n, size_t lo, double* scratch,
                   uint8_t* x) {
    if (n == 1) {
        uint8_t d = th[0] < 0.0 ? 1 : 0;
        if (job.genie) {
            if (d != job.truth[lo]) job.errors[lo] += 1;
            d = job.truth[lo];
        } else if (job.frozen_mask[lo]) {
            d = job.frozen_vals ? job.frozen_vals[lo] : 0;
        }
        job.u[lo] = d;
        x[0] = d;
        return;
    }
    size_t h = n / 2;
    double* a = scratch;
    for (size_t k = 0; k < h; ++k) a[k] = th[k] * th[k + h];
    sc_rec(job, a, h, lo, scratch + h, x);
    for (size_t k = 0; k < h; ++k) {
        double s = x[k] ? -1.0 : 1.0;
        double den = 1.0 + s * th[k] * th[k + h];
        a[k] = den == 0.0 ? 0.0 : (th[k + h] + s * th[k]) / den;
    }
    sc_rec(job, a, h, lo + h, scratch + h, x + h);
    for (size_t k = 0; k < h; ++k) x[k] ^= x[k + h];
}

}  // namespace pbk
