#include "recounter/machine.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "recounter/errors.hpp"

namespace recounter {

CounterMachine compile(const Ruleset& rules, const CompileOptions& opts) {
    CounterMachine m;
    m.detector = build_detector(rules, opts.state_cap);
    m.n_rules = rules.n;
    m.window_mode = opts.window_mode;

    std::map<std::tuple<uint32_t, uint8_t, uint32_t>, uint32_t> chan;
    for (uint32_t i = 0; i < m.detector.channel_count; ++i) {
        const ChannelInfo& info = m.detector.directory[i];
        chan[{info.rule, uint8_t(info.kind), info.index}] = i;
    }
    auto channel = [&](uint32_t rule, DetectorKind kind, uint32_t index) {
        auto it = chan.find({rule, uint8_t(kind), index});
        if (it == chan.end()) throw Error("detector channel missing");
        return it->second;
    };
    UnitMode wmode = opts.window_mode == WindowMode::Exact
                         ? UnitMode::GapWindowExact
                         : UnitMode::GapWindowPaper;

    for (const auto& rule : rules.rules) {
        PrefixSegments segs = segment_prefix(rule.prefix, rules.mode);
        bool have_aux = !segs.windows.empty();
        for (uint32_t j = 0; j < segs.windows.size(); ++j) {
            CounterUnit u;
            u.rule = rule.rule_id;
            u.stage = j + 1;
            u.mode = wmode;
            u.role = UnitRole::Aux;
            u.width = uint32_t(fixed_width(segs.segments[j + 1]));
            u.lower = segs.windows[j].k + u.width;
            u.upper = segs.windows[j].m + u.width;
            u.expiry = u.upper + 1;
            u.detector_channel =
                channel(rule.rule_id, DetectorKind::SegmentEnd, j + 1);
            auto it = chan.find({rule.rule_id,
                                 uint8_t(DetectorKind::SegmentForbidden),
                                 j + 1});
            u.forbidden_channel =
                it == chan.end() ? -1 : int32_t(it->second);
            u.arm_channel =
                j == 0 ? int32_t(channel(rule.rule_id,
                                         DetectorKind::SegmentEnd, 0))
                       : -1;
            m.units.push_back(u);
        }
        for (uint32_t j = 0; j < rule.chain.size(); ++j) {
            CounterUnit u;
            u.rule = rule.rule_id;
            u.stage = j;
            u.role = UnitRole::Chain;
            const std::string& w = rule.chain[j];
            u.width = uint32_t(w.size());
            u.detector_channel =
                channel(rule.rule_id, DetectorKind::ChainWordEnd, j);
            if (j == 0 && rule.gap) {
                u.mode = wmode;
                u.lower = rule.gap->k + u.width;
                u.upper = rule.gap->m + u.width;
                u.expiry = u.upper + 1;
                u.forbidden_channel = int32_t(
                    channel(rule.rule_id, DetectorKind::GapForbidden, 0));
            } else {
                u.mode = UnitMode::PlainThreshold;
                u.lower = u.width;
                u.upper = 0;
                u.expiry = 0;
            }
            u.arm_channel =
                (j == 0 && !have_aux)
                    ? int32_t(channel(rule.rule_id, DetectorKind::PrefixEnd, 0))
                    : -1;
            m.units.push_back(u);
        }
    }
    return m;
}

size_t ScanState::payload_bytes() const {
    size_t b = sizeof(*this);
    b += units.capacity() * sizeof(UnitScanState);
    for (const auto& h : arm_history) b += sizeof(BitHistory) + h.bits.capacity();
    for (const auto& h : dirty_history)
        b += sizeof(BitHistory) + h.bits.capacity();
    b += latched.capacity();
    return b;
}

ScanState new_scan_state(const CounterMachine& m) {
    ScanState st;
    st.dfa_state = m.detector.dfa.start;
    st.units.resize(m.units.size());
    st.arm_history.resize(m.units.size());
    st.dirty_history.resize(m.units.size());
    for (size_t i = 0; i < m.units.size(); ++i) {
        if (m.units[i].mode == UnitMode::GapWindowExact) {
            st.arm_history[i].assign(m.units[i].expiry + 1);
            st.dirty_history[i].assign(m.units[i].expiry + 1);
        }
    }
    st.latched.assign(m.n_rules, 0);
    return st;
}

void reset(const CounterMachine& m, ScanState& st) {
    st.dfa_state = m.detector.dfa.start;
    st.position = 0;
    for (auto& us : st.units) us = UnitScanState{};
    for (auto& h : st.arm_history)
        if (!h.bits.empty()) h.clear();
    for (auto& h : st.dirty_history)
        if (!h.bits.empty()) h.clear();
    std::fill(st.latched.begin(), st.latched.end(), 0);
}

namespace {

// One pass over the units: tick (when a byte was consumed), arm, gate,
// cascade. Unit order is rule-major, so a fire reaches the next unit of the
// same rule within the same pass.
void unit_pass(const CounterMachine& m, ScanState& st, const uint64_t* row,
               bool tick) {
    auto bit = [&](int32_t ch) {
        return ch >= 0 && ((row[ch >> 6] >> (ch & 63)) & 1u) != 0;
    };
    bool prev_fire = false;
    uint32_t prev_rule = UINT32_MAX;
    for (size_t i = 0; i < m.units.size(); ++i) {
        const CounterUnit& u = m.units[i];
        UnitScanState& us = st.units[i];
        if (u.rule != prev_rule) {
            prev_fire = false;
            prev_rule = u.rule;
        }

        if (tick) {
            switch (u.mode) {
                case UnitMode::PlainThreshold:
                    if (us.armed && us.counter < u.lower) ++us.counter;
                    break;
                case UnitMode::GapWindowPaper:
                    if (us.armed) {
                        ++us.counter;
                        if (bit(u.forbidden_channel))
                            us.forbidden_at =
                                std::min(us.forbidden_at, us.counter);
                        if (us.counter >= u.expiry) us.armed = false;
                    }
                    break;
                case UnitMode::GapWindowExact:
                    st.arm_history[i].shift();
                    st.dirty_history[i].shift();
                    if (bit(u.forbidden_channel))
                        st.dirty_history[i].set_now();
                    break;
            }
        }

        bool arm_event = u.arm_channel >= 0 ? bit(u.arm_channel) : prev_fire;
        if (arm_event) {
            if (u.mode == UnitMode::GapWindowExact) {
                st.arm_history[i].set_now();
            } else if (!us.armed) {
                us.armed = true;
                us.counter = 0;
                us.forbidden_at = UINT32_MAX;
            }
        }

        bool fire = false;
        if (bit(u.detector_channel)) {
            switch (u.mode) {
                case UnitMode::PlainThreshold:
                    fire = us.armed && us.counter >= u.lower;
                    break;
                case UnitMode::GapWindowPaper:
                    fire = us.armed && us.counter >= u.lower &&
                           us.counter <= u.upper &&
                           uint64_t(us.forbidden_at) + u.width > us.counter;
                    break;
                case UnitMode::GapWindowExact: {
                    const BitHistory& warm = st.arm_history[i];
                    const BitHistory& dirt = st.dirty_history[i];
                    uint32_t j = u.width;
                    for (uint32_t d = u.lower; d <= u.upper; ++d) {
                        bool dirty = false;
                        while (j < d) {
                            if (dirt.get(j)) {
                                dirty = true;
                                break;
                            }
                            ++j;
                        }
                        if (dirty) break;
                        if (warm.get(d)) {
                            fire = true;
                            break;
                        }
                    }
                    break;
                }
            }
        }
        if (fire) {
            us.fired = true;
            bool last = i + 1 == m.units.size() || m.units[i + 1].rule != u.rule;
            if (last) st.latched[u.rule] = 1;
        }
        prev_fire = fire;
    }
}

}  // namespace

void step_byte(const CounterMachine& m, ScanState& st, uint8_t byte) {
    if (st.position == 0)
        unit_pass(m, st, m.detector.output_row(st.dfa_state), false);
    st.dfa_state = m.detector.dfa.next(st.dfa_state, byte);
    ++st.position;
    unit_pass(m, st, m.detector.output_row(st.dfa_state), true);
}

OutputVector output_vector(const CounterMachine& m, const ScanState& st) {
    OutputVector v;
    v.bits.assign(m.n_rules + 1, 0);
    uint8_t any = 0;
    for (uint32_t r = 0; r < m.n_rules; ++r) {
        v.bits[r] = st.latched[r];
        any |= st.latched[r];
    }
    v.bits[m.n_rules] = any;
    return v;
}

OutputVector step(const CounterMachine& m, ScanState& st, uint8_t byte) {
    step_byte(m, st, byte);
    return output_vector(m, st);
}

Scanner::Scanner(const CounterMachine& m)
    : machine_(&m),
      state_(new_scan_state(m)),
      reported_(m.units.size(), 0) {}

void Scanner::feed(std::string_view chunk) {
    const CounterMachine& m = *machine_;
    for (unsigned char b : chunk) {
        step_byte(m, state_, b);
        for (size_t i = 0; i < m.units.size(); ++i) {
            if (!state_.units[i].fired || reported_[i]) continue;
            reported_[i] = 1;
            const CounterUnit& u = m.units[i];
            if (u.role != UnitRole::Chain) continue;
            bool last =
                i + 1 == m.units.size() || m.units[i + 1].rule != u.rule;
            events_.push_back({u.rule, u.stage, state_.position,
                               last ? EventKind::RuleMatch
                                    : EventKind::StageAdvance});
        }
    }
}

OutputVector Scanner::vector() const {
    return output_vector(*machine_, state_);
}

ScanResult scan(const CounterMachine& m, std::string_view stream) {
    Scanner s(m);
    s.feed(stream);
    return {s.events(), s.vector()};
}

void machine_run(const CounterMachine& m, ScanState& st,
                 std::string_view word) {
    reset(m, st);
    for (unsigned char b : word) step_byte(m, st, b);
}

}  // namespace recounter
