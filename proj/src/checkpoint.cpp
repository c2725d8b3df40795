#include <komega/sweep.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string_view>
#include <system_error>

namespace komega::sweep {

namespace {

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ull;
constexpr std::uint64_t fnv_prime = 0x100000001b3ull;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= fnv_prime;
    }
    return h;
}

// Hex text keeps real numbers exact and locale-independent on both ends.
void put_real(std::string& s, double x) {
    char buf[48];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
    s.append(buf, r.ptr);
    s += '\n';
}

void put_int(std::string& s, long long v) {
    s += std::to_string(v);
    s += '\n';
}

void put_text(std::string& s, std::string_view token) {
    s.append(token);
    s += '\n';
}

const std::array<std::uint32_t, 256>& crc_table() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    return table;
}

std::uint32_t crc32(std::string_view bytes) {
    std::uint32_t c = 0xffffffffu;
    for (const char ch : bytes)
        c = crc_table()[(c ^ static_cast<unsigned char>(ch)) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

[[noreturn]] void malformed(const std::string& detail) {
    throw CheckpointError("malformed checkpoint: " + detail);
}

std::string_view next_line(std::string_view& rest) {
    const std::size_t eol = rest.find('\n');
    if (eol == std::string_view::npos) malformed("missing final newline");
    const std::string_view line = rest.substr(0, eol);
    rest.remove_prefix(eol + 1);
    return line;
}

std::string_view next_token(std::string_view& line) {
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    const std::size_t end = line.find(' ');
    const std::string_view token = line.substr(0, end);
    line.remove_prefix(end == std::string_view::npos ? line.size() : end + 1);
    return token;
}

template <typename Int>
Int parse_int(std::string_view token, const char* what) {
    Int value{};
    const auto r = std::from_chars(token.data(), token.data() + token.size(), value);
    if (r.ec != std::errc{} || r.ptr != token.data() + token.size())
        malformed(std::string("bad integer in ") + what);
    return value;
}

double parse_real(std::string_view token) {
    double value{};
    const auto r =
        std::from_chars(token.data(), token.data() + token.size(), value, std::chars_format::hex);
    if (r.ec != std::errc{} || r.ptr != token.data() + token.size())
        malformed("bad real value in block");
    return value;
}

}  // namespace

std::uint64_t config_fingerprint(const SweepConfig& config) {
    // Canonical text form of every field that influences the computed table.
    // The template parameter config.system.a is overridden by the grid, so it
    // is deliberately left out.
    std::string s;
    put_text(s, "komega sweep config 1");
    put_int(s, static_cast<long long>(config.system.kind));
    put_int(s, config.system.m);
    put_real(s, config.system.dt);
    put_int(s, config.system.stride);
    put_int(s, config.system.transient);
    put_real(s, config.system.blowup_bound);
    put_real(s, config.a_start);
    put_real(s, config.a_end);
    put_real(s, config.a_step);
    put_int(s, config.n_omega);
    put_real(s, config.omega_window.lo);
    put_real(s, config.omega_window.hi);
    put_int(s, static_cast<long long>(config.N_list.size()));
    for (const Index N : config.N_list) put_int(s, N);
    put_real(s, config.delta);
    put_int(s, static_cast<long long>(config.schemes.size()));
    for (const auto& scheme : config.schemes) {
        put_text(s, scheme.name);
        put_real(s, scheme.I0.lo);
        put_real(s, scheme.I0.hi);
        put_real(s, scheme.I1.lo);
        put_real(s, scheme.I1.hi);
    }
    put_int(s, static_cast<long long>(config.master_seed));
    put_real(s, config.threshold_fraction);
    return fnv1a(fnv_offset, s);
}

std::string serialize_checkpoint(const CheckpointState& state) {
    std::string s;
    put_text(s, "komega checkpoint 1");
    char head[32];
    std::snprintf(head, sizeof head, "fingerprint %016llx",
                  static_cast<unsigned long long>(state.fingerprint));
    put_text(s, head);
    s += "n_omega ";
    put_int(s, state.n_omega);
    for (const auto& [key, values] : state.blocks) {
        s += "block ";
        s += std::to_string(key.first);
        s += ' ';
        s += std::to_string(key.second);
        for (const double v : values) {
            s += ' ';
            char buf[48];
            const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
            s.append(buf, r.ptr);
        }
        s += '\n';
    }
    char tail[24];
    std::snprintf(tail, sizeof tail, "crc32 %08x", crc32(s));
    put_text(s, tail);
    return s;
}

CheckpointState parse_checkpoint(std::string_view text) {
    // Verify the trailing checksum before trusting anything else; a torn or
    // bit-rotted file must not be half-loaded.
    const std::size_t tail = text.rfind("crc32 ");
    if (tail == std::string_view::npos || (tail != 0 && text[tail - 1] != '\n'))
        malformed("missing checksum line");
    const std::string_view body = text.substr(0, tail);
    std::string_view tail_line = text.substr(tail);
    std::string_view rest_after_crc = tail_line;
    (void)next_line(rest_after_crc);
    if (!rest_after_crc.empty()) malformed("trailing data after checksum");
    std::string_view crc_line = tail_line.substr(0, tail_line.size() - rest_after_crc.size());
    (void)next_token(crc_line);  // "crc32"
    crc_line = crc_line.substr(0, crc_line.find('\n'));
    std::uint32_t stored = 0;
    {
        while (!crc_line.empty() && crc_line.back() == '\n') crc_line.remove_suffix(1);
        const auto r = std::from_chars(crc_line.data(), crc_line.data() + crc_line.size(), stored, 16);
        if (r.ec != std::errc{} || r.ptr != crc_line.data() + crc_line.size())
            malformed("bad checksum value");
    }
    if (crc32(body) != stored) throw CheckpointError("checkpoint checksum mismatch");

    std::string_view rest = body;
    if (next_line(rest) != "komega checkpoint 1")
        throw CheckpointError("unsupported checkpoint version");

    CheckpointState state;
    bool have_fingerprint = false, have_n_omega = false;
    while (!rest.empty()) {
        std::string_view line = next_line(rest);
        const std::string_view head = next_token(line);
        if (head == "fingerprint") {
            const std::string_view token = next_token(line);
            std::uint64_t fp = 0;
            const auto r = std::from_chars(token.data(), token.data() + token.size(), fp, 16);
            if (r.ec != std::errc{} || r.ptr != token.data() + token.size())
                malformed("bad fingerprint");
            state.fingerprint = fp;
            have_fingerprint = true;
        } else if (head == "n_omega") {
            state.n_omega = parse_int<Index>(next_token(line), "n_omega");
            have_n_omega = true;
        } else if (head == "block") {
            if (!have_n_omega) malformed("block before n_omega");
            const Index ai = parse_int<Index>(next_token(line), "block index");
            const Index Ni = parse_int<Index>(next_token(line), "block index");
            std::vector<double> values;
            values.reserve(static_cast<std::size_t>(state.n_omega));
            while (true) {
                const std::string_view token = next_token(line);
                if (token.empty()) break;
                values.push_back(parse_real(token));
            }
            if (static_cast<Index>(values.size()) != state.n_omega)
                malformed("block length does not match n_omega");
            if (!state.blocks.emplace(std::make_pair(ai, Ni), std::move(values)).second)
                malformed("duplicate block");
        } else {
            malformed("unknown record '" + std::string(head) + "'");
        }
    }
    if (!have_fingerprint || !have_n_omega) malformed("missing header fields");
    return state;
}

void checkpoint_write(const std::string& path, const CheckpointState& state) {
    const std::string text = serialize_checkpoint(state);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot open checkpoint file for writing: " + tmp);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw CheckpointError("cannot write checkpoint file: " + tmp);
    }
    // Publish atomically so a crash mid-write leaves the previous file intact.
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CheckpointError("cannot replace checkpoint file: " + ec.message());
}

CheckpointState checkpoint_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read checkpoint file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw CheckpointError("cannot read checkpoint file: " + path);
    return parse_checkpoint(text);
}

}  // namespace komega::sweep
