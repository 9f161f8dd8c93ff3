#pragma once

#include <string>
#include <vector>

#include "recounter/machine.hpp"

namespace recounter {

// Binary machine image. Layout (all integers little-endian):
//   "RCTR" magic, version u32, alphabet u32 (=256), state count u32,
//   start u32, channel count u32,
//   dense transition table (state-major u32 cells),
//   per-state output bit-vectors (padded to byte boundary),
//   channel directory (rule u32, kind u8, index u32) per channel,
//   n_rules u32, window mode u8, unit count u32,
//   unit records: rule u32, stage u32, mode u8, presets 3x u32,
//                 role u8, width u32, detector u32, forbidden i32, arm i32.
// Serialization is canonical: load(save(m)) re-saves byte-identically.
inline constexpr uint32_t kMachineFormatVersion = 1;

std::vector<uint8_t> serialize_machine(const CounterMachine& m);

// Throws FormatError on bad magic, unknown version, or inconsistent fields.
CounterMachine deserialize_machine(const std::vector<uint8_t>& bytes);

void save_machine(const CounterMachine& m, const std::string& path);
CounterMachine load_machine(const std::string& path);

}  // namespace recounter
