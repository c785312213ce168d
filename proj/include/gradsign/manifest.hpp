#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gradsign::manifest {

// Run record: ordered key=value lines, one per line. Together with the
// toolkit version it fully determines a run, so replaying a manifest
// reproduces the outputs byte for byte.
class Manifest {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, std::uint64_t value);
    void set(const std::string& key, int value);
    void set(const std::string& key, bool value);
    // Doubles round-trip exactly (%.17g).
    void set_real(const std::string& key, double value);
    void set_real_list(const std::string& key, const std::vector<double>& values);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_real(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_real_list(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_real(double value);
std::string format_real_list(const std::vector<double>& values);
std::vector<double> parse_real_list(const std::string& text);

}  // namespace gradsign::manifest
