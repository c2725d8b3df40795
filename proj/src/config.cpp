#include <komega/config.hpp>
#include <komega/csv.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace komega::config {

namespace {

[[noreturn]] void fail(int line, const std::string& detail) {
    throw DomainError("config line " + std::to_string(line) + ": " + detail);
}

std::string trim(std::string s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
}

double parse_real(const std::string& v, int line) {
    double x{};
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        fail(line, "expected a real number, got '" + v + "'");
    return x;
}

long long parse_integer(const std::string& v, int line) {
    long long x{};
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        fail(line, "expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_seed(const std::string& v, int line) {
    std::uint64_t x{};
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        fail(line, "expected an unsigned integer, got '" + v + "'");
    return x;
}

bool parse_switch(const std::string& v, int line) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(line, "expected on/off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v, int line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto end = comma == std::string::npos ? v.size() : comma;
        const std::string item = trim(v.substr(start, end - start));
        if (item.empty()) fail(line, "empty entry in list '" + v + "'");
        out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) fail(line, "expected a comma-separated list");
    return out;
}

std::vector<Index> parse_index_list(const std::string& v, int line) {
    std::vector<Index> out;
    for (const auto& item : split_list(v, line))
        out.push_back(static_cast<Index>(parse_integer(item, line)));
    return out;
}

std::vector<double> parse_real_list(const std::string& v, int line) {
    std::vector<double> out;
    for (const auto& item : split_list(v, line)) out.push_back(parse_real(item, line));
    return out;
}

std::vector<classify::IntervalScheme> parse_schemes(const std::string& v, int line) {
    const auto known = classify::standard_schemes();
    std::vector<classify::IntervalScheme> out;
    for (const auto& name : split_list(v, line)) {
        const auto it = std::find_if(known.begin(), known.end(),
                                     [&](const auto& s) { return s.name == name; });
        if (it == known.end()) fail(line, "unknown scheme '" + name + "' (expected i, ii or iii)");
        for (const auto& chosen : out)
            if (chosen.name == name) fail(line, "scheme '" + name + "' listed twice");
        out.push_back(*it);
    }
    return out;
}

std::string join_index_list(const std::vector<Index>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(values[i]);
    }
    return s;
}

std::string join_real_list(const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += csv::format_real(values[i]);
    }
    return s;
}

std::string join_scheme_names(const std::vector<classify::IntervalScheme>& schemes) {
    std::string s;
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        if (i) s += ',';
        s += schemes[i].name;
    }
    return s;
}

}  // namespace

CliConfig parse_config_text(const std::string& text) {
    CliConfig cfg;
    std::set<std::string> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header '" + s + "'");
            section = s.substr(1, s.size() - 2);
            if (section != "system" && section != "sweep" && section != "probe" &&
                section != "output")
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (value.empty()) fail(line, "empty value for key '" + key + "'");
        if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");
        if (!seen.insert(section + "." + key).second)
            fail(line, "duplicate key '" + key + "' in [" + section + "]");

        if (section == "system") {
            if (key == "kind") {
                if (value == "logistic")
                    cfg.sweep.system.kind = dynamics::SystemKind::logistic_map;
                else if (value == "lorenz96")
                    cfg.sweep.system.kind = dynamics::SystemKind::lorenz96;
                else
                    fail(line, "unknown system kind '" + value + "'");
            } else if (key == "m")
                cfg.sweep.system.m = static_cast<Index>(parse_integer(value, line));
            else if (key == "dt")
                cfg.sweep.system.dt = parse_real(value, line);
            else if (key == "stride")
                cfg.sweep.system.stride = static_cast<Index>(parse_integer(value, line));
            else if (key == "transient")
                cfg.sweep.system.transient = static_cast<Index>(parse_integer(value, line));
            else if (key == "blowup_bound")
                cfg.sweep.system.blowup_bound = parse_real(value, line);
            else
                fail(line, "unknown key '" + key + "' in [system]");
        } else if (section == "sweep") {
            if (key == "a_start")
                cfg.sweep.a_start = parse_real(value, line);
            else if (key == "a_end")
                cfg.sweep.a_end = parse_real(value, line);
            else if (key == "a_step")
                cfg.sweep.a_step = parse_real(value, line);
            else if (key == "n_omega")
                cfg.sweep.n_omega = static_cast<Index>(parse_integer(value, line));
            else if (key == "omega_min")
                cfg.sweep.omega_window.lo = parse_real(value, line);
            else if (key == "omega_max")
                cfg.sweep.omega_window.hi = parse_real(value, line);
            else if (key == "N_list")
                cfg.sweep.N_list = parse_index_list(value, line);
            else if (key == "delta")
                cfg.sweep.delta = parse_real(value, line);
            else if (key == "seed")
                cfg.sweep.master_seed = parse_seed(value, line);
            else if (key == "threshold_fraction")
                cfg.sweep.threshold_fraction = parse_real(value, line);
            else if (key == "schemes")
                cfg.sweep.schemes = parse_schemes(value, line);
            else
                fail(line, "unknown key '" + key + "' in [sweep]");
        } else if (section == "probe") {
            if (key == "a")
                cfg.probe.a = parse_real(value, line);
            else if (key == "omega")
                cfg.probe.omega = parse_real(value, line);
            else if (key == "N_list")
                cfg.probe.N_list = parse_index_list(value, line);
            else if (key == "deltas")
                cfg.probe.deltas = parse_real_list(value, line);
            else
                fail(line, "unknown key '" + key + "' in [probe]");
        } else {  // output
            if (key == "dir")
                cfg.output.dir = value;
            else if (key == "checkpoint")
                cfg.output.checkpoint = parse_switch(value, line);
            else
                fail(line, "unknown key '" + key + "' in [output]");
        }
    }

    const auto require = [&seen](const char* section_name, const char* key) {
        if (!seen.count(std::string(section_name) + "." + key))
            throw DomainError(std::string("config: missing required key '") + key + "' in [" +
                              section_name + "]");
    };
    require("system", "kind");
    require("sweep", "a_start");
    require("sweep", "a_end");
    require("sweep", "a_step");
    require("sweep", "N_list");

    // Physics-affecting fields never default silently.
    if (!seen.count("sweep.delta"))
        cfg.notices.push_back("delta defaulted to " + csv::format_real(cfg.sweep.delta));
    if (!seen.count("system.transient")) {
        if (cfg.sweep.system.kind == dynamics::SystemKind::lorenz96)
            cfg.sweep.system.transient = 10000;
        cfg.notices.push_back("transient defaulted to " +
                              std::to_string(cfg.sweep.system.transient));
    }
    if (!seen.count("system.dt"))
        cfg.notices.push_back("dt defaulted to " + csv::format_real(cfg.sweep.system.dt));
    if (!seen.count("system.stride"))
        cfg.notices.push_back("stride defaulted to " + std::to_string(cfg.sweep.system.stride));
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string print_config(const CliConfig& cfg) {
    std::string s;
    s += "[system]\n";
    s += "kind = ";
    s += cfg.sweep.system.kind == dynamics::SystemKind::lorenz96 ? "lorenz96" : "logistic";
    s += '\n';
    s += "m = " + std::to_string(cfg.sweep.system.m) + '\n';
    s += "dt = " + csv::format_real(cfg.sweep.system.dt) + '\n';
    s += "stride = " + std::to_string(cfg.sweep.system.stride) + '\n';
    s += "transient = " + std::to_string(cfg.sweep.system.transient) + '\n';
    s += "blowup_bound = " + csv::format_real(cfg.sweep.system.blowup_bound) + '\n';
    s += '\n';
    s += "[sweep]\n";
    s += "a_start = " + csv::format_real(cfg.sweep.a_start) + '\n';
    s += "a_end = " + csv::format_real(cfg.sweep.a_end) + '\n';
    s += "a_step = " + csv::format_real(cfg.sweep.a_step) + '\n';
    s += "n_omega = " + std::to_string(cfg.sweep.n_omega) + '\n';
    s += "omega_min = " + csv::format_real(cfg.sweep.omega_window.lo) + '\n';
    s += "omega_max = " + csv::format_real(cfg.sweep.omega_window.hi) + '\n';
    s += "N_list = " + join_index_list(cfg.sweep.N_list) + '\n';
    s += "delta = " + csv::format_real(cfg.sweep.delta) + '\n';
    s += "seed = " + std::to_string(cfg.sweep.master_seed) + '\n';
    s += "threshold_fraction = " + csv::format_real(cfg.sweep.threshold_fraction) + '\n';
    s += "schemes = " + join_scheme_names(cfg.sweep.schemes) + '\n';
    s += '\n';
    s += "[probe]\n";
    s += "a = " + csv::format_real(cfg.probe.a) + '\n';
    s += "omega = " + csv::format_real(cfg.probe.omega) + '\n';
    s += "N_list = " + join_index_list(cfg.probe.N_list) + '\n';
    s += "deltas = " + join_real_list(cfg.probe.deltas) + '\n';
    s += '\n';
    s += "[output]\n";
    s += "dir = " + cfg.output.dir + '\n';
    s += "checkpoint = ";
    s += cfg.output.checkpoint ? "on" : "off";
    s += '\n';
    return s;
}

}  // namespace komega::config
