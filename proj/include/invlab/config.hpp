// Plain-text experiment configs: one [pipeline] section of key = value lines.
// Every key must be consumed by the pipeline that runs, or the config is
// rejected; nothing is silently ignored.
#pragma once
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "invlab/errors.hpp"

namespace invlab {

struct ExperimentConfig {
    std::string pipeline;
    std::map<std::string, std::string> kv;
};

// Parses an INI-lite file: [section] headers name the pipeline, '#' comments.
std::vector<ExperimentConfig> parse_config_text(const std::string& text);
std::vector<ExperimentConfig> parse_config_file(const std::string& path);

// Typed access with consumption tracking.
class ConfigView {
public:
    explicit ConfigView(const ExperimentConfig& cfg) : cfg_(&cfg) {}

    bool has(const std::string& key) const { return cfg_->kv.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback);
    std::string require_string(const std::string& key);
    double get_double(const std::string& key, double fallback);
    double require_double(const std::string& key);
    int get_int(const std::string& key, int fallback);
    int require_int(const std::string& key);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback);

    // Throws ConfigError when a key was never consumed.
    void assert_all_consumed() const;

private:
    std::string raw(const std::string& key);
    const ExperimentConfig* cfg_;
    std::set<std::string> consumed_;
};

} // namespace invlab
