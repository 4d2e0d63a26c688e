#pragma once

#include <ostream>
#include <span>
#include <string>

#include "adrobust/robustness.hpp"

namespace adrobust {

/// One row per record; deterministic columns only (no timings), so equal
/// seeds give byte-identical files.
void write_records_csv(const RobustnessReport& report, std::ostream& out);

/// Wall-clock fit / score seconds per record.
void write_timings_csv(const RobustnessReport& report, std::ostream& out);

/// Aggregates, per-category areas, conventions and warnings.
std::string report_json(const RobustnessReport& report,
                        std::span<const std::string> exclusions = {});

/// AUC versus sample size for one category, one polyline per method.
std::string render_svg(const RobustnessReport& report, const std::string& category,
                       int aug_factor = 0);

}  // namespace adrobust
