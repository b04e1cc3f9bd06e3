#pragma once

#include <string>
#include <vector>

#include "markovopt/run_record.hpp"
#include "markovopt/scaling.hpp"

namespace markovopt {

/// Log-scale metric against iteration. One record draws a single curve;
/// several draw the median with the interquartile band.
std::string convergence_svg(const std::vector<RunRecord>& records, Metric metric,
                            const std::string& title);

/// log-log scatter of oracle calls against tau with the fitted line and its
/// slope. Censored points are drawn hollow.
std::string scaling_svg(const ScalingTable& table, const std::string& title);

}  // namespace markovopt
