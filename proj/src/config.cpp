#include "invlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace invlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
    std::vector<ExperimentConfig> sections;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
            ExperimentConfig cfg;
            cfg.pipeline = trim(line.substr(1, line.size() - 2));
            if (cfg.pipeline.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty pipeline name");
            sections.push_back(std::move(cfg));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value, got '" + line + "'");
        if (sections.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside any [pipeline] section");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!sections.back().kv.emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (sections.empty()) throw ConfigError("config contains no [pipeline] section");
    return sections;
}

std::vector<ExperimentConfig> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string ConfigView::raw(const std::string& key) {
    consumed_.insert(key);
    auto it = cfg_->kv.find(key);
    if (it == cfg_->kv.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string ConfigView::get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = cfg_->kv.find(key);
    return it == cfg_->kv.end() ? fallback : it->second;
}

std::string ConfigView::require_string(const std::string& key) { return raw(key); }

double ConfigView::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    auto it = cfg_->kv.find(key);
    if (it == cfg_->kv.end()) return fallback;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
    return v;
}

double ConfigView::require_double(const std::string& key) {
    raw(key);
    return get_double(key, 0.0);
}

int ConfigView::get_int(const std::string& key, int fallback) {
    double v = get_double(key, static_cast<double>(fallback));
    int iv = static_cast<int>(v);
    if (static_cast<double>(iv) != v)
        throw ConfigError("config key '" + key + "' must be an integer");
    return iv;
}

int ConfigView::require_int(const std::string& key) {
    raw(key);
    return get_int(key, 0);
}

std::uint64_t ConfigView::get_u64(const std::string& key, std::uint64_t fallback) {
    consumed_.insert(key);
    auto it = cfg_->kv.find(key);
    if (it == cfg_->kv.end()) return fallback;
    char* end = nullptr;
    unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "' is not an unsigned integer: '" + it->second + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> ConfigView::get_double_list(const std::string& key,
                                                const std::vector<double>& fallback) {
    consumed_.insert(key);
    auto it = cfg_->kv.find(key);
    if (it == cfg_->kv.end()) return fallback;
    std::vector<double> out;
    std::istringstream ls(it->second);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str())
            throw ConfigError("config key '" + key + "' has a non-numeric entry: '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' is an empty list");
    return out;
}

void ConfigView::assert_all_consumed() const {
    for (const auto& [key, value] : cfg_->kv)
        if (consumed_.count(key) == 0)
            throw ConfigError("unknown config key '" + key + "' for pipeline '" + cfg_->pipeline + "'");
}

} // namespace invlab
