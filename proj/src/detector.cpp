#include "recounter/detector.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "recounter/errors.hpp"
#include "recounter/nfa.hpp"
#include "refine.hpp"

namespace recounter {

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

struct RowHash {
    size_t operator()(const std::vector<uint64_t>& v) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (uint64_t x : v) {
            h ^= x;
            h *= 0x100000001b3ull;
        }
        return size_t(h);
    }
};

// Copies `sub` into `big` with renumbered states; returns (start, accept).
std::pair<uint32_t, uint32_t> graft(Nfa& big, const Nfa& sub) {
    uint32_t off = big.state_count;
    big.state_count += sub.state_count;
    for (const auto& e : sub.edges) {
        NfaEdge copy = e;
        copy.from += off;
        copy.to += off;
        big.edges.push_back(std::move(copy));
    }
    return {sub.start + off, sub.accepts.front() + off};
}

}  // namespace

AnnotatedDfa determinize_tagged(const Nfa& nfa,
                                const std::vector<TaggedAccept>& tags,
                                uint32_t channel_count,
                                std::vector<ChannelInfo> directory,
                                uint32_t state_cap) {
    uint32_t stride = (channel_count + 63) / 64;
    if (stride == 0) stride = 1;

    std::vector<std::vector<uint32_t>> eps(nfa.state_count);
    std::vector<std::vector<const NfaEdge*>> byte_edges(nfa.state_count);
    for (const auto& e : nfa.edges) {
        if (e.epsilon)
            eps[e.from].push_back(e.to);
        else
            byte_edges[e.from].push_back(&e);
    }
    std::vector<std::vector<uint64_t>> tag_rows(nfa.state_count);
    for (const auto& t : tags) {
        auto& row = tag_rows[t.state];
        if (row.empty()) row.assign(stride, 0);
        row[t.channel >> 6] |= uint64_t(1) << (t.channel & 63);
    }

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
    AnnotatedDfa out;
    out.channel_count = channel_count;
    out.output_stride = stride;
    out.directory = std::move(directory);

    auto intern = [&](std::vector<uint32_t> set) {
        auto it = ids.find(set);
        if (it != ids.end()) return it->second;
        uint32_t id = uint32_t(sets.size());
        if (id >= state_cap)
            throw ResourceLimitError("dfa states", state_cap);
        ids.emplace(set, id);
        sets.push_back(std::move(set));
        out.outputs.resize(size_t(id + 1) * stride, 0);
        uint64_t* row = &out.outputs[size_t(id) * stride];
        bool acc = false;
        for (uint32_t s : sets[id]) {
            if (!tag_rows[s].empty()) {
                acc = true;
                for (uint32_t w = 0; w < stride; ++w) row[w] |= tag_rows[s][w];
            }
        }
        out.dfa.table.resize(size_t(id + 1) * 256, 0);
        out.dfa.accept.push_back(acc ? 1 : 0);
        return id;
    };

    std::vector<uint32_t> start_set{nfa.start};
    closure(start_set);
    out.dfa.start = intern(std::move(start_set));

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
            out.dfa.table[size_t(cur) * 256 + size_t(b)] = id;
        }
    }
    out.dfa.state_count = uint32_t(sets.size());
    return out;
}

AnnotatedDfa minimize(const AnnotatedDfa& adfa) {
    const uint32_t n = adfa.dfa.state_count;
    std::vector<uint32_t> cls(n);
    std::unordered_map<std::vector<uint64_t>, uint32_t, RowHash> row_ids;
    for (uint32_t s = 0; s < n; ++s) {
        std::vector<uint64_t> row(adfa.output_row(s),
                                  adfa.output_row(s) + adfa.output_stride);
        auto [it, fresh] =
            row_ids.emplace(std::move(row), uint32_t(row_ids.size()));
        cls[s] = it->second;
    }
    uint32_t n_classes =
        detail::refine_classes(adfa.dfa, cls, uint32_t(row_ids.size()));
    auto [order, reachable] = detail::bfs_order(adfa.dfa, cls, n_classes);

    AnnotatedDfa out;
    out.channel_count = adfa.channel_count;
    out.output_stride = adfa.output_stride;
    out.directory = adfa.directory;
    out.dfa.state_count = reachable;
    out.dfa.start = order[cls[adfa.dfa.start]];
    out.dfa.table.assign(size_t(reachable) * 256, 0);
    out.dfa.accept.assign(reachable, 0);
    out.outputs.assign(size_t(reachable) * adfa.output_stride, 0);
    for (uint32_t s = 0; s < n; ++s) {
        uint32_t id = order[cls[s]];
        if (id == UINT32_MAX) continue;
        out.dfa.accept[id] = adfa.dfa.accept[s];
        const uint32_t* row = &adfa.dfa.table[size_t(s) * 256];
        uint32_t* orow = &out.dfa.table[size_t(id) * 256];
        for (int b = 0; b < 256; ++b) orow[b] = order[cls[row[b]]];
        std::copy(adfa.output_row(s), adfa.output_row(s) + adfa.output_stride,
                  out.outputs.begin() + size_t(id) * adfa.output_stride);
    }
    return out;
}

AnnotatedDfa aho_corasick(const std::vector<std::string>& words) {
    for (const auto& w : words)
        if (w.empty()) throw Error("empty keyword");

    uint32_t n = uint32_t(words.size());
    uint32_t stride = (n + 63) / 64;
    if (stride == 0) stride = 1;

    // Trie with dense children; UINT32_MAX marks absence.
    std::vector<std::vector<uint32_t>> child;
    std::vector<std::vector<uint64_t>> out_rows;
    auto add_node = [&] {
        child.emplace_back(256, UINT32_MAX);
        out_rows.emplace_back(stride, 0);
        return uint32_t(child.size() - 1);
    };
    add_node();
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t s = 0;
        for (unsigned char b : words[i]) {
            if (child[s][b] == UINT32_MAX) child[s][b] = add_node();
            s = child[s][b];
        }
        out_rows[s][i >> 6] |= uint64_t(1) << (i & 63);
    }

    uint32_t states = uint32_t(child.size());
    std::vector<uint32_t> fail(states, 0);
    AnnotatedDfa out;
    out.channel_count = n;
    out.output_stride = stride;
    out.dfa.state_count = states;
    out.dfa.start = 0;
    out.dfa.table.assign(size_t(states) * 256, 0);
    out.outputs.assign(size_t(states) * stride, 0);
    out.dfa.accept.assign(states, 0);
    for (uint32_t i = 0; i < n; ++i)
        out.directory.push_back({0, DetectorKind::ChainWordEnd, i});

    std::deque<uint32_t> queue;
    for (int b = 0; b < 256; ++b) {
        uint32_t c = child[0][size_t(b)];
        if (c == UINT32_MAX) {
            out.dfa.table[size_t(b)] = 0;
        } else {
            out.dfa.table[size_t(b)] = c;
            fail[c] = 0;
            queue.push_back(c);
        }
    }
    while (!queue.empty()) {
        uint32_t s = queue.front();
        queue.pop_front();
        for (uint32_t w = 0; w < stride; ++w)
            out_rows[s][w] |= out_rows[fail[s]][w];
        for (int b = 0; b < 256; ++b) {
            uint32_t c = child[s][size_t(b)];
            uint32_t via_fail = out.dfa.table[size_t(fail[s]) * 256 + size_t(b)];
            if (c == UINT32_MAX) {
                out.dfa.table[size_t(s) * 256 + size_t(b)] = via_fail;
            } else {
                out.dfa.table[size_t(s) * 256 + size_t(b)] = c;
                fail[c] = via_fail;
                queue.push_back(c);
            }
        }
    }
    for (uint32_t s = 0; s < states; ++s) {
        bool acc = false;
        for (uint32_t w = 0; w < stride; ++w) {
            out.outputs[size_t(s) * stride + w] = out_rows[s][w];
            if (out_rows[s][w]) acc = true;
        }
        out.dfa.accept[s] = acc ? 1 : 0;
    }
    return out;
}

AnnotatedDfa build_detector(const Ruleset& rules, uint32_t state_cap) {
    Nfa big;
    uint32_t hub = big.add_state();
    ByteSet all;
    all.set();
    big.add_edge(hub, hub, all);

    std::vector<TaggedAccept> tags;
    std::vector<ChannelInfo> directory;

    auto add_branch = [&](const Nfa& sub, ChannelInfo info) {
        auto [start, accept] = graft(big, sub);
        big.add_epsilon(hub, start);
        tags.push_back({accept, uint32_t(directory.size())});
        directory.push_back(info);
    };
    auto byte_branch = [&](const ByteSet& bytes, ChannelInfo info) {
        uint32_t a = big.add_state();
        big.add_edge(hub, a, bytes);
        tags.push_back({a, uint32_t(directory.size())});
        directory.push_back(info);
    };
    auto word_branch = [&](const std::string& w, ChannelInfo info) {
        uint32_t cur = hub;
        for (unsigned char b : w) {
            uint32_t nx = big.add_state();
            ByteSet bs;
            bs.set(b);
            big.add_edge(cur, nx, bs);
            cur = nx;
        }
        tags.push_back({cur, uint32_t(directory.size())});
        directory.push_back(info);
    };

    for (const auto& rule : rules.rules) {
        PrefixSegments segs = segment_prefix(rule.prefix, rules.mode);
        if (segs.windows.empty()) {
            if (rule.prefix.kind == AstKind::Empty) {
                tags.push_back({hub, uint32_t(directory.size())});
                directory.push_back(
                    {rule.rule_id, DetectorKind::PrefixEnd, 0});
            } else {
                add_branch(thompson_nfa(rule.prefix),
                           {rule.rule_id, DetectorKind::PrefixEnd, 0});
            }
        } else {
            for (uint32_t i = 0; i < segs.segments.size(); ++i) {
                if (segs.segments[i].kind == AstKind::Empty) {
                    tags.push_back({hub, uint32_t(directory.size())});
                    directory.push_back(
                        {rule.rule_id, DetectorKind::SegmentEnd, i});
                } else {
                    add_branch(thompson_nfa(segs.segments[i]),
                               {rule.rule_id, DetectorKind::SegmentEnd, i});
                }
            }
            for (uint32_t j = 0; j < segs.windows.size(); ++j) {
                ByteSet outside = ~segs.windows[j].allowed;
                if (outside.none()) continue;
                byte_branch(outside, {rule.rule_id,
                                      DetectorKind::SegmentForbidden, j + 1});
            }
        }
        if (rule.gap) {
            ByteSet bs;
            bs.set(rule.gap->forbidden);
            byte_branch(bs, {rule.rule_id, DetectorKind::GapForbidden, 0});
        }
        for (uint32_t j = 0; j < rule.chain.size(); ++j)
            word_branch(rule.chain[j],
                        {rule.rule_id, DetectorKind::ChainWordEnd, j});
    }

    big.start = hub;
    uint32_t channels = uint32_t(directory.size());
    AnnotatedDfa adfa = determinize_tagged(big, tags, channels,
                                           std::move(directory), state_cap);
    return minimize(adfa);
}

AnnotatedRunResult run_dfa(const AnnotatedDfa& adfa, std::string_view word) {
    AnnotatedRunResult r;
    r.rows.reserve(word.size());
    uint32_t s = adfa.dfa.start;
    for (unsigned char b : word) {
        s = adfa.dfa.next(s, b);
        r.rows.emplace_back(adfa.output_row(s),
                            adfa.output_row(s) + adfa.output_stride);
    }
    r.accept = adfa.dfa.is_accept(s);
    return r;
}

}  // namespace recounter
