#include "dsbs/report.hpp"

namespace dsbs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

nlohmann::json to_json(const MetricMethod& m) {
    return std::visit(overloaded{
                          [](const method::Exact&) { return nlohmann::json{{"kind", "exact"}}; },
                          [](const method::Entropic& e) {
                              return nlohmann::json{{"kind", "entropic"},
                                                    {"epsilon", e.epsilon},
                                                    {"iterations", e.iterations},
                                                    {"converged", e.converged}};
                          },
                          [](const method::Subsampled& s) {
                              return nlohmann::json{
                                  {"kind", "subsampled"}, {"subsample", s.subsample}, {"repetitions", s.repetitions}};
                          },
                      },
                      m);
}

nlohmann::json to_json(const MetricReport& report) {
    nlohmann::json aux = nlohmann::json::object();
    for (const auto& [key, value] : report.auxiliary) aux[key] = value;
    return nlohmann::json{{"w2", report.w2}, {"method", to_json(report.method)}, {"auxiliary", aux}, {"meta", report.meta}};
}

} // namespace dsbs
