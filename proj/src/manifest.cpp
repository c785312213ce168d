#include "gradsign/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gradsign/errors.hpp"

namespace gradsign::manifest {

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string format_real_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_real(values[i]);
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ConfigError("empty entry in numeric list '" + text + "'");
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("bad number '" + item + "' in list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty numeric list");
    return out;
}

void Manifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
}

void Manifest::set(const std::string& key, int value) {
    set(key, std::to_string(value));
}

void Manifest::set(const std::string& key, bool value) {
    set(key, std::string(value ? "true" : "false"));
}

void Manifest::set_real(const std::string& key, double value) {
    set(key, format_real(value));
}

void Manifest::set_real_list(const std::string& key, const std::vector<double>& values) {
    set(key, format_real_list(values));
}

bool Manifest::has(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return true;
    }
    return false;
}

const std::string& Manifest::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw ConfigError("manifest: missing key '" + key + "'");
}

std::uint64_t Manifest::get_u64(const std::string& key) const {
    return std::stoull(get(key));
}

double Manifest::get_real(const std::string& key) const {
    return std::strtod(get(key).c_str(), nullptr);
}

bool Manifest::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("manifest: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> Manifest::get_real_list(const std::string& key) const {
    return parse_real_list(get(key));
}

void Manifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& [k, v] : entries_) out << k << "=" << v << "\n";
    if (!out) throw IoError("short write to " + path.string());
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("manifest: malformed line '" + line + "' in " + path.string());
        m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
}

}  // namespace gradsign::manifest
