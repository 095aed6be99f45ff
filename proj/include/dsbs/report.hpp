#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>

#include <json.hpp>

namespace dsbs {

namespace method {
struct Exact {};
struct Entropic {
    double epsilon = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};
struct Subsampled {
    std::size_t subsample = 0;
    std::size_t repetitions = 0;
};
} // namespace method

using MetricMethod = std::variant<method::Exact, method::Entropic, method::Subsampled>;

/// Result of comparing a generated cloud with a test cloud. Serializes to JSON with
/// the fields w2, method, auxiliary and meta.
struct MetricReport {
    double w2 = 0.0;
    MetricMethod method = method::Exact{};
    std::map<std::string, double> auxiliary;
    nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json to_json(const MetricMethod& m);
nlohmann::json to_json(const MetricReport& report);

} // namespace dsbs
