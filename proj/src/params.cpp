#include "cfbench/params.hpp"

#include <fmt/format.h>

#include "cfbench/error.hpp"

namespace cfbench {

std::optional<std::uint64_t> as_uint(const nlohmann::json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    return std::nullopt;
}

ParamReader::ParamReader(const nlohmann::json& params, std::string path)
    : params_(params), path_(std::move(path)) {
    if (!params_.is_object() && !params_.is_null())
        throw ConfigError(fmt::format("{}: expected an object", path_));
}

const nlohmann::json* ParamReader::lookup(const std::string& key,
                                          std::initializer_list<const char*> aliases) {
    if (params_.is_null()) return nullptr;
    const nlohmann::json* found = nullptr;
    std::string found_key;
    auto probe = [&](const std::string& k) {
        auto it = params_.find(k);
        if (it == params_.end()) return;
        if (found)
            throw ConfigError(fmt::format("{}: both '{}' and '{}' given", path_, found_key, k));
        found = &*it;
        found_key = k;
        consumed_.insert(k);
    };
    probe(key);
    for (const char* alias : aliases) probe(alias);
    return found;
}

std::uint64_t ParamReader::uint(const std::string& key, std::uint64_t fallback,
                                std::initializer_list<const char*> aliases) {
    const auto* v = lookup(key, aliases);
    if (!v) return fallback;
    const auto x = as_uint(*v);
    if (!x) throw ConfigError(fmt::format("{}: expected a non-negative integer", field(key)));
    return *x;
}

std::uint64_t ParamReader::positive(const std::string& key, std::uint64_t fallback,
                                    std::initializer_list<const char*> aliases) {
    const auto* v = lookup(key, aliases);
    if (!v) return fallback;
    const auto x = as_uint(*v);
    if (!x || *x == 0) throw ConfigError(fmt::format("{}: expected a positive integer", field(key)));
    return *x;
}

std::optional<std::uint64_t> ParamReader::optional_positive(const std::string& key) {
    const auto* v = lookup(key, {});
    if (!v) return std::nullopt;
    const auto x = as_uint(*v);
    if (!x || *x == 0) throw ConfigError(fmt::format("{}: expected a positive integer", field(key)));
    return *x;
}

double ParamReader::number(const std::string& key, double fallback) {
    const auto* v = lookup(key, {});
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(fmt::format("{}: expected a number", field(key)));
    return v->get<double>();
}

double ParamReader::probability(const std::string& key, double fallback) {
    const double p = number(key, fallback);
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(fmt::format("{}: expected a probability in [0,1], got {}", field(key), p));
    return p;
}

void ParamReader::finish() const {
    if (params_.is_null()) return;
    for (const auto& [k, _] : params_.items()) {
        if (!consumed_.count(k)) throw ConfigError(fmt::format("{}: unknown key", field(k)));
    }
}

}  // namespace cfbench
