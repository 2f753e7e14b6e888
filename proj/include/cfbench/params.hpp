#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

namespace cfbench {

// Non-negative integer value of v, signed or unsigned representation alike.
std::optional<std::uint64_t> as_uint(const nlohmann::json& v);

// Strict reader for a component parameter object. Every accessor records the
// key it consumed; finish() rejects anything left over. Errors are
// ConfigError with a dotted path to the offending field.
class ParamReader {
public:
    ParamReader(const nlohmann::json& params, std::string path);

    std::uint64_t uint(const std::string& key, std::uint64_t fallback,
                       std::initializer_list<const char*> aliases = {});
    std::uint64_t positive(const std::string& key, std::uint64_t fallback,
                           std::initializer_list<const char*> aliases = {});
    double number(const std::string& key, double fallback);
    double probability(const std::string& key, double fallback);
    std::optional<std::uint64_t> optional_positive(const std::string& key);

    void finish() const;

    std::string field(const std::string& key) const { return path_ + "." + key; }

private:
    const nlohmann::json* lookup(const std::string& key, std::initializer_list<const char*> aliases);

    const nlohmann::json& params_;
    std::string path_;
    std::set<std::string> consumed_;
};

}  // namespace cfbench
