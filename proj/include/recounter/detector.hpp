#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "recounter/decompose.hpp"
#include "recounter/dfa.hpp"

namespace recounter {

// What a detector output channel reports.
enum class DetectorKind : uint8_t {
    PrefixEnd = 0,          // .*R matched up to here
    ChainWordEnd = 1,       // chain word of stage `index` ends here
    GapForbidden = 2,       // current byte is the gap's forbidden byte
    SegmentEnd = 3,         // .*<prefix segment index> matched up to here
    SegmentForbidden = 4,   // current byte outside window `index`'s class
};

struct ChannelInfo {
    uint32_t rule = 0;
    DetectorKind kind = DetectorKind::PrefixEnd;
    uint32_t index = 0;  // stage, or segment/window index
};

// Moore machine: a DFA whose states carry a bit per output channel.
struct AnnotatedDfa {
    Dfa dfa;
    uint32_t channel_count = 0;
    uint32_t output_stride = 0;      // u64 words per state
    std::vector<uint64_t> outputs;   // state-major
    std::vector<ChannelInfo> directory;

    const uint64_t* output_row(uint32_t s) const {
        return outputs.data() + size_t(s) * output_stride;
    }
    bool output_bit(uint32_t s, uint32_t ch) const {
        return (output_row(s)[ch >> 6] >> (ch & 63)) & 1u;
    }
};

// Accepting state tag used while determinizing.
struct TaggedAccept {
    uint32_t state = 0;
    uint32_t channel = 0;
};

// Subset construction that unions accept tags into per-state output rows.
// A state accepts iff any channel bit is set.
AnnotatedDfa determinize_tagged(const Nfa& nfa,
                                const std::vector<TaggedAccept>& tags,
                                uint32_t channel_count,
                                std::vector<ChannelInfo> directory,
                                uint32_t state_cap = kDefaultStateCap);

// Output-respecting minimization: states merge only when their whole output
// rows agree. Canonically renumbered, idempotent.
AnnotatedDfa minimize(const AnnotatedDfa& adfa);

// Keyword automaton (goto/fail construction, fail edges resolved into a
// dense table). Channel i fires wherever words[i] ends, including words that
// end as suffixes of other matches. Duplicates share a state and both fire.
// State count is at most sum(|word|) + 1. Empty words are rejected.
AnnotatedDfa aho_corasick(const std::vector<std::string>& words);

// Block 1 of the compiled machine: the union of per-rule prefix/segment
// detectors, forbidden-byte detectors, and the keyword automaton over all
// chain words, determinized together and minimized output-respecting.
AnnotatedDfa build_detector(const Ruleset& rules,
                            uint32_t state_cap = kDefaultStateCap);

struct AnnotatedRunResult {
    bool accept = false;
    // Output row snapshot after each consumed byte.
    std::vector<std::vector<uint64_t>> rows;
};

AnnotatedRunResult run_dfa(const AnnotatedDfa& adfa, std::string_view word);

}  // namespace recounter
