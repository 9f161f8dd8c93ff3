#include "recounter/dfa.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "recounter/errors.hpp"
#include "recounter/nfa.hpp"
#include "refine.hpp"

namespace recounter {

namespace detail {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    return h ^ (h >> 33);
}

}  // namespace

uint32_t refine_classes(const Dfa& dfa, std::vector<uint32_t>& cls,
                        uint32_t n_classes) {
    const uint32_t n = dfa.state_count;
    std::vector<uint32_t> next_cls(n);
    std::vector<uint64_t> sig(n);

    for (;;) {
        for (uint32_t s = 0; s < n; ++s) {
            uint64_t h = mix(0x2545f4914f6cdd1dull, cls[s]);
            const uint32_t* row = &dfa.table[size_t(s) * 256];
            for (int b = 0; b < 256; ++b) h = mix(h, cls[row[b]]);
            sig[s] = h;
        }
        // Bucket by hash; exact signature compare inside a bucket.
        std::unordered_map<uint64_t, std::vector<std::pair<uint32_t, uint32_t>>>
            buckets;
        buckets.reserve(n * 2);
        auto same_sig = [&](uint32_t a, uint32_t b) {
            if (cls[a] != cls[b]) return false;
            const uint32_t* ra = &dfa.table[size_t(a) * 256];
            const uint32_t* rb = &dfa.table[size_t(b) * 256];
            for (int x = 0; x < 256; ++x)
                if (cls[ra[x]] != cls[rb[x]]) return false;
            return true;
        };
        uint32_t count = 0;
        for (uint32_t s = 0; s < n; ++s) {
            auto& bucket = buckets[sig[s]];
            uint32_t assigned = UINT32_MAX;
            for (auto& [rep, id] : bucket) {
                if (same_sig(rep, s)) {
                    assigned = id;
                    break;
                }
            }
            if (assigned == UINT32_MAX) {
                assigned = count++;
                bucket.emplace_back(s, assigned);
            }
            next_cls[s] = assigned;
        }
        if (count == n_classes) {
            cls = next_cls;
            return count;
        }
        cls = next_cls;
        n_classes = count;
    }
}

std::pair<std::vector<uint32_t>, uint32_t> bfs_order(
    const Dfa& dfa, const std::vector<uint32_t>& cls, uint32_t n_classes) {
    std::vector<uint32_t> order(n_classes, UINT32_MAX);
    std::vector<uint32_t> rep(n_classes, UINT32_MAX);
    for (uint32_t s = dfa.state_count; s-- > 0;) rep[cls[s]] = s;

    uint32_t assigned = 0;
    std::deque<uint32_t> queue;
    order[cls[dfa.start]] = assigned++;
    queue.push_back(cls[dfa.start]);
    while (!queue.empty()) {
        uint32_t c = queue.front();
        queue.pop_front();
        const uint32_t* row = &dfa.table[size_t(rep[c]) * 256];
        for (int b = 0; b < 256; ++b) {
            uint32_t d = cls[row[b]];
            if (order[d] == UINT32_MAX) {
                order[d] = assigned++;
                queue.push_back(d);
            }
        }
    }
    return {std::move(order), assigned};
}

}  // namespace detail

namespace {

struct SetHash {
    size_t operator()(const std::vector<uint32_t>& v) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (uint32_t x : v) {
            h ^= x;
            h *= 0x100000001b3ull;
        }
        return size_t(h);
    }
};

}  // namespace

Dfa subset_construct(const Nfa& nfa, uint32_t state_cap) {
    // Per-state adjacency.
    std::vector<std::vector<uint32_t>> eps(nfa.state_count);
    std::vector<std::vector<const NfaEdge*>> byte_edges(nfa.state_count);
    for (const auto& e : nfa.edges) {
        if (e.epsilon)
            eps[e.from].push_back(e.to);
        else
            byte_edges[e.from].push_back(&e);
    }
    std::vector<uint8_t> is_accept(nfa.state_count, 0);
    for (uint32_t a : nfa.accepts) is_accept[a] = 1;

    std::vector<uint8_t> mark(nfa.state_count, 0);
    std::vector<uint32_t> stack;
    auto closure = [&](std::vector<uint32_t>& set) {
        for (uint32_t s : set) {
            mark[s] = 1;
            stack.push_back(s);
        }
        while (!stack.empty()) {
            uint32_t s = stack.back();
            stack.pop_back();
            for (uint32_t t : eps[s]) {
                if (!mark[t]) {
                    mark[t] = 1;
                    set.push_back(t);
                    stack.push_back(t);
                }
            }
        }
        std::sort(set.begin(), set.end());
        for (uint32_t s : set) mark[s] = 0;
    };

    std::unordered_map<std::vector<uint32_t>, uint32_t, SetHash> ids;
    std::vector<std::vector<uint32_t>> sets;
    Dfa dfa;

    auto intern = [&](std::vector<uint32_t> set) {
        auto it = ids.find(set);
        if (it != ids.end()) return it->second;
        uint32_t id = uint32_t(sets.size());
        if (id >= state_cap)
            throw ResourceLimitError("dfa states", state_cap);
        ids.emplace(set, id);
        sets.push_back(std::move(set));
        dfa.table.resize(size_t(id + 1) * 256, 0);
        bool acc = false;
        for (uint32_t s : sets[id])
            if (is_accept[s]) acc = true;
        dfa.accept.push_back(acc ? 1 : 0);
        return id;
    };

    std::vector<uint32_t> start_set{nfa.start};
    closure(start_set);
    dfa.start = intern(std::move(start_set));

    std::vector<uint32_t> target;
    for (uint32_t cur = 0; cur < sets.size(); ++cur) {
        for (int b = 0; b < 256; ++b) {
            target.clear();
            for (uint32_t s : sets[cur]) {
                for (const NfaEdge* e : byte_edges[s]) {
                    if (e->bytes.test(size_t(b)) && !mark[e->to]) {
                        mark[e->to] = 1;
                        target.push_back(e->to);
                    }
                }
            }
            for (uint32_t s : target) mark[s] = 0;
            closure(target);
            uint32_t id = intern(target);
            dfa.table[size_t(cur) * 256 + size_t(b)] = id;
        }
    }
    dfa.state_count = uint32_t(sets.size());
    return dfa;
}

Dfa minimize(const Dfa& dfa) {
    std::vector<uint32_t> cls(dfa.state_count);
    for (uint32_t s = 0; s < dfa.state_count; ++s)
        cls[s] = dfa.accept[s] ? 1 : 0;
    bool any0 = false, any1 = false;
    for (uint32_t s = 0; s < dfa.state_count; ++s)
        (cls[s] ? any1 : any0) = true;
    uint32_t n0 = (any0 && any1) ? 2 : 1;
    if (n0 == 1)
        for (auto& c : cls) c = 0;

    uint32_t n_classes = detail::refine_classes(dfa, cls, n0);
    auto [order, reachable] = detail::bfs_order(dfa, cls, n_classes);

    Dfa out;
    out.state_count = reachable;
    out.start = order[cls[dfa.start]];
    out.table.assign(size_t(reachable) * 256, 0);
    out.accept.assign(reachable, 0);
    for (uint32_t s = 0; s < dfa.state_count; ++s) {
        uint32_t id = order[cls[s]];
        if (id == UINT32_MAX) continue;
        out.accept[id] = dfa.accept[s];
        const uint32_t* row = &dfa.table[size_t(s) * 256];
        uint32_t* orow = &out.table[size_t(id) * 256];
        for (int b = 0; b < 256; ++b) orow[b] = order[cls[row[b]]];
    }
    return out;
}

RunResult run_dfa(const Dfa& dfa, std::string_view word) {
    RunResult r;
    r.trace.reserve(word.size() + 1);
    uint32_t s = dfa.start;
    r.trace.push_back(dfa.is_accept(s));
    for (unsigned char b : word) {
        s = dfa.next(s, b);
        r.trace.push_back(dfa.is_accept(s));
    }
    r.accept = dfa.is_accept(s);
    return r;
}

bool dfa_accepts(const Dfa& dfa, std::string_view word) {
    uint32_t s = dfa.start;
    for (unsigned char b : word) s = dfa.next(s, b);
    return dfa.is_accept(s);
}

bool dfa_equivalent(const Dfa& a, const Dfa& b) {
    std::unordered_map<uint64_t, bool> seen;
    std::deque<std::pair<uint32_t, uint32_t>> queue;
    auto key = [](uint32_t x, uint32_t y) {
        return (uint64_t(x) << 32) | y;
    };
    seen[key(a.start, b.start)] = true;
    queue.emplace_back(a.start, b.start);
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        if (a.is_accept(x) != b.is_accept(y)) return false;
        for (int c = 0; c < 256; ++c) {
            uint32_t nx = a.next(x, uint8_t(c));
            uint32_t ny = b.next(y, uint8_t(c));
            auto [it, fresh] = seen.emplace(key(nx, ny), true);
            if (fresh) queue.emplace_back(nx, ny);
        }
    }
    return true;
}

}  // namespace recounter
