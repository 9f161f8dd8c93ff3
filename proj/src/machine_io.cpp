#include "recounter/machine_io.hpp"

#include <cstdio>
#include <cstring>

#include "recounter/errors.hpp"

namespace recounter {

namespace {

struct Writer {
    std::vector<uint8_t> out;

    void u8(uint8_t v) { out.push_back(v); }
    void u32(uint32_t v) {
        out.push_back(uint8_t(v));
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v >> 16));
        out.push_back(uint8_t(v >> 24));
    }
    void i32(int32_t v) { u32(uint32_t(v)); }
};

struct Reader {
    const std::vector<uint8_t>& in;
    size_t pos = 0;

    uint8_t u8() {
        if (pos + 1 > in.size()) throw FormatError("truncated image");
        return in[pos++];
    }
    uint32_t u32() {
        if (pos + 4 > in.size()) throw FormatError("truncated image");
        uint32_t v = uint32_t(in[pos]) | (uint32_t(in[pos + 1]) << 8) |
                     (uint32_t(in[pos + 2]) << 16) |
                     (uint32_t(in[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    int32_t i32() { return int32_t(u32()); }
};

}  // namespace

std::vector<uint8_t> serialize_machine(const CounterMachine& m) {
    Writer w;
    w.out.reserve(64 + size_t(m.detector.dfa.state_count) * 1060);
    w.u8('R');
    w.u8('C');
    w.u8('T');
    w.u8('R');
    w.u32(kMachineFormatVersion);
    w.u32(256);
    w.u32(m.detector.dfa.state_count);
    w.u32(m.detector.dfa.start);
    w.u32(m.detector.channel_count);
    for (uint32_t cell : m.detector.dfa.table) w.u32(cell);
    uint32_t row_bytes = (m.detector.channel_count + 7) / 8;
    for (uint32_t s = 0; s < m.detector.dfa.state_count; ++s) {
        const uint64_t* row = m.detector.output_row(s);
        for (uint32_t b = 0; b < row_bytes; ++b)
            w.u8(uint8_t(row[b >> 3] >> ((b & 7) * 8)));
    }
    for (const auto& ch : m.detector.directory) {
        w.u32(ch.rule);
        w.u8(uint8_t(ch.kind));
        w.u32(ch.index);
    }
    w.u32(m.n_rules);
    w.u8(uint8_t(m.window_mode));
    w.u32(uint32_t(m.units.size()));
    for (const auto& u : m.units) {
        w.u32(u.rule);
        w.u32(u.stage);
        w.u8(uint8_t(u.mode));
        w.u32(u.lower);
        w.u32(u.upper);
        w.u32(u.expiry);
        w.u8(uint8_t(u.role));
        w.u32(u.width);
        w.u32(u.detector_channel);
        w.i32(u.forbidden_channel);
        w.i32(u.arm_channel);
    }
    return std::move(w.out);
}

CounterMachine deserialize_machine(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    if (bytes.size() < 4 || bytes[0] != 'R' || bytes[1] != 'C' ||
        bytes[2] != 'T' || bytes[3] != 'R')
        throw FormatError("bad magic");
    r.pos = 4;
    uint32_t version = r.u32();
    if (version != kMachineFormatVersion)
        throw FormatError("unsupported version " + std::to_string(version));
    uint32_t alphabet = r.u32();
    if (alphabet != 256) throw FormatError("unsupported alphabet size");
    uint32_t states = r.u32();
    uint32_t start = r.u32();
    uint32_t channels = r.u32();
    if (states == 0) throw FormatError("no states");
    if (start >= states) throw FormatError("start state out of range");
    // Sanity bound so a hostile header cannot force a huge allocation before
    // the size check fails.
    if (size_t(states) * 1024 > bytes.size() * 4 + (1u << 20))
        throw FormatError("truncated image");

    CounterMachine m;
    AnnotatedDfa& d = m.detector;
    d.dfa.state_count = states;
    d.dfa.start = start;
    d.channel_count = channels;
    d.output_stride = channels ? (channels + 63) / 64 : 1;
    d.dfa.table.resize(size_t(states) * 256);
    for (auto& cell : d.dfa.table) {
        cell = r.u32();
        if (cell >= states) throw FormatError("transition out of range");
    }
    uint32_t row_bytes = (channels + 7) / 8;
    d.outputs.assign(size_t(states) * d.output_stride, 0);
    d.dfa.accept.assign(states, 0);
    for (uint32_t s = 0; s < states; ++s) {
        uint64_t* row = &d.outputs[size_t(s) * d.output_stride];
        for (uint32_t b = 0; b < row_bytes; ++b)
            row[b >> 3] |= uint64_t(r.u8()) << ((b & 7) * 8);
        // Mask padding bits above channel_count.
        if (channels % 64 != 0 && channels != 0)
            row[(channels - 1) >> 6] &=
                (~uint64_t(0)) >> (63 - ((channels - 1) & 63));
        bool acc = false;
        for (uint32_t k = 0; k < d.output_stride; ++k)
            if (row[k]) acc = true;
        d.dfa.accept[s] = acc ? 1 : 0;
    }
    d.directory.resize(channels);
    for (auto& ch : d.directory) {
        ch.rule = r.u32();
        uint8_t kind = r.u8();
        if (kind > 4) throw FormatError("bad channel kind");
        ch.kind = DetectorKind(kind);
        ch.index = r.u32();
    }
    m.n_rules = r.u32();
    uint8_t wm = r.u8();
    if (wm > 1) throw FormatError("bad window mode");
    m.window_mode = WindowMode(wm);
    uint32_t unit_count = r.u32();
    if (size_t(unit_count) * 30 > bytes.size())
        throw FormatError("truncated image");
    m.units.resize(unit_count);
    for (auto& u : m.units) {
        u.rule = r.u32();
        u.stage = r.u32();
        uint8_t mode = r.u8();
        if (mode > 2) throw FormatError("bad unit mode");
        u.mode = UnitMode(mode);
        u.lower = r.u32();
        u.upper = r.u32();
        u.expiry = r.u32();
        uint8_t role = r.u8();
        if (role > 1) throw FormatError("bad unit role");
        u.role = UnitRole(role);
        u.width = r.u32();
        u.detector_channel = r.u32();
        u.forbidden_channel = r.i32();
        u.arm_channel = r.i32();
        if (u.rule >= m.n_rules) throw FormatError("unit rule out of range");
        if (u.detector_channel >= channels)
            throw FormatError("unit channel out of range");
        if (u.forbidden_channel >= int32_t(channels) ||
            u.forbidden_channel < -1)
            throw FormatError("unit channel out of range");
        if (u.arm_channel >= int32_t(channels) || u.arm_channel < -1)
            throw FormatError("unit channel out of range");
        if (u.is_window() && u.expiry > (1u << 24))
            throw FormatError("window preset out of range");
    }
    if (r.pos != bytes.size()) throw FormatError("trailing bytes");
    return m;
}

void save_machine(const CounterMachine& m, const std::string& path) {
    std::vector<uint8_t> bytes = serialize_machine(m);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    int close_rc = std::fclose(f);
    if (written != bytes.size() || close_rc != 0)
        throw IoError("short write to '" + path + "'");
}

CounterMachine load_machine(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "'");
    std::vector<uint8_t> bytes;
    uint8_t buf[65536];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0)
        bytes.insert(bytes.end(), buf, buf + got);
    std::fclose(f);
    return deserialize_machine(bytes);
}

}  // namespace recounter
