#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "recounter/decompose.hpp"
#include "recounter/detector.hpp"

namespace recounter {

// How bounded windows ([^c]{k,m} gaps and counted prefix repeats) track
// overlapping activations.
//   Paper: one counter per window; arms, counts to expiry, disarms, re-arms.
//          Sound, but activations arriving while busy are dropped.
//   Exact: a shift register of arm bits plus forbidden-byte history; every
//          activation is tracked, at m'+1 bits per window.
enum class WindowMode : uint8_t { Paper = 0, Exact = 1 };

enum class UnitMode : uint8_t {
    PlainThreshold = 0,   // fire when word ends >= threshold bytes after arm
    GapWindowPaper = 1,
    GapWindowExact = 2,
};

enum class UnitRole : uint8_t {
    Chain = 0,  // gates a chain word stage
    Aux = 1,    // gates a counted window inside the prefix
};

// One counter + trigger + conjunction gate.
struct CounterUnit {
    uint32_t rule = 0;
    uint32_t stage = 0;   // chain: stage index; aux: window index
    UnitMode mode = UnitMode::PlainThreshold;
    UnitRole role = UnitRole::Chain;
    // Presets. Plain: lower = threshold = |word|, upper = expiry = 0.
    // Window: lower = k + width, upper = m + width, expiry = upper + 1.
    uint32_t lower = 0;
    uint32_t upper = 0;
    uint32_t expiry = 0;
    uint32_t width = 0;               // |word| or segment width
    uint32_t detector_channel = 0;
    int32_t forbidden_channel = -1;   // -1: no forbidden byte to watch
    int32_t arm_channel = -1;         // -1: armed by the previous unit's fire

    uint32_t largest_preset() const {
        return mode == UnitMode::PlainThreshold ? lower : expiry;
    }
    bool is_window() const { return mode != UnitMode::PlainThreshold; }
};

struct CompileOptions {
    WindowMode window_mode = WindowMode::Paper;
    uint32_t state_cap = kDefaultStateCap;
};

// Detector DFA plus the counter/gate network. Immutable after compile;
// concurrent scans are safe as long as each uses its own ScanState.
struct CounterMachine {
    AnnotatedDfa detector;
    std::vector<CounterUnit> units;  // rule-major; per rule: aux then chain
    uint32_t n_rules = 0;
    WindowMode window_mode = WindowMode::Paper;

    uint32_t output_width() const { return n_rules + 1; }
};

CounterMachine compile(const Ruleset& rules, const CompileOptions& opts = {});

// Fixed-capacity bit history; age 0 is the current step.
struct BitHistory {
    std::vector<uint8_t> bits;
    uint32_t head = 0;

    void assign(uint32_t n) { bits.assign(n, 0); head = 0; }
    void clear() { std::fill(bits.begin(), bits.end(), 0); head = 0; }
    void shift() {
        head = head == 0 ? uint32_t(bits.size()) - 1 : head - 1;
        bits[head] = 0;
    }
    void set_now() { bits[head] = 1; }
    bool get(uint32_t age) const {
        return bits[(head + age) % bits.size()] != 0;
    }
};

struct UnitScanState {
    bool armed = false;
    uint32_t counter = 0;
    uint32_t forbidden_at = UINT32_MAX;  // earliest forbidden offset since arm
    bool fired = false;                  // has ever fired
};

// Everything that changes while scanning. Size is fixed at creation.
struct ScanState {
    uint32_t dfa_state = 0;
    uint64_t position = 0;  // bytes consumed
    std::vector<UnitScanState> units;
    std::vector<BitHistory> arm_history;    // exact-mode windows only
    std::vector<BitHistory> dirty_history;  // forbidden-byte history
    std::vector<uint8_t> latched;           // per rule, monotone

    size_t payload_bytes() const;
};

// Rule bits 0..n-1 plus the any-rule bit n. Monotone over a scan.
struct OutputVector {
    std::vector<uint8_t> bits;

    bool operator==(const OutputVector& o) const { return bits == o.bits; }
    bool any() const { return !bits.empty() && bits.back() != 0; }
};

ScanState new_scan_state(const CounterMachine& m);
void reset(const CounterMachine& m, ScanState& st);

// Consumes one byte: advances the detector, ticks armed counters, arms
// units whose source fired, evaluates gates in cascade order, latches.
OutputVector step(const CounterMachine& m, ScanState& st, uint8_t byte);

// step() without materializing the output vector; scan-loop fast path.
void step_byte(const CounterMachine& m, ScanState& st, uint8_t byte);

OutputVector output_vector(const CounterMachine& m, const ScanState& st);

enum class EventKind : uint8_t { StageAdvance = 0, RuleMatch = 1 };

struct MatchEvent {
    uint32_t rule = 0;
    uint32_t stage = 0;
    uint64_t offset = 0;  // 1-based: bytes consumed when the stage first fired
    EventKind kind = EventKind::StageAdvance;
};

// Incremental scanner; chunk boundaries never change results.
class Scanner {
public:
    explicit Scanner(const CounterMachine& m);
    void feed(std::string_view chunk);
    const std::vector<MatchEvent>& events() const { return events_; }
    const ScanState& state() const { return state_; }
    OutputVector vector() const;

private:
    const CounterMachine* machine_;
    ScanState state_;
    std::vector<MatchEvent> events_;
    std::vector<uint8_t> reported_;  // per unit
};

struct ScanResult {
    std::vector<MatchEvent> events;
    OutputVector final_vector;
};

ScanResult scan(const CounterMachine& m, std::string_view stream);

// Reuses `st`; returns the final per-rule latches. Differential-test loop.
void machine_run(const CounterMachine& m, ScanState& st, std::string_view word);

}  // namespace recounter
