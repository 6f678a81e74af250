#ifndef OPGRAPH_REPORTS_HPP
#define OPGRAPH_REPORTS_HPP

#include <string>

#include "opgraph/harness.hpp"
#include "opgraph/metrics.hpp"

namespace opg {

/// JSON renderings of the harness reports (seed, thresholds, per-row values).
std::string to_json(const AdjointSuiteReport& r);
std::string to_json(const RegistryReport& r);
std::string to_json(const NormsReport& r);
std::string to_json(const SweepReport& r);
std::string to_json(const ClosureReport& r);
std::string to_json(const ExtensionCheckReport& r);
std::string to_json(const DotTestReport& r);
std::string to_json(const FidelityReport& r);

void write_text_file(const std::string& path, const std::string& content);

/// Basis-growth curve as CSV (N, K, introduced_kinds).
std::string growth_csv(const std::vector<GrowthPoint>& curve);

} // namespace opg

#endif
