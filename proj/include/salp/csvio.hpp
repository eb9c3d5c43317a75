#pragma once

#include <string>
#include <vector>

#include "salp/signal.hpp"

// Plot-ready CSV emission and ingestion. All floating-point values use 17
// significant digits so files round-trip bit-exactly; writes go through a
// temp file plus rename.
namespace salp {

std::string format_g17(double v);

// Atomically replaces path with content (temp file in the same directory,
// then rename). Throws std::runtime_error on I/O failure.
void atomic_write(const std::string& path, const std::string& content);

// Header: t, x, y, theta, alpha_1..alpha_{N-1}, u_1..u_N, f_1..f_N.
std::string trajectory_csv(const TrajectoryRun& run);
void write_trajectory_csv(const std::string& path, const TrajectoryRun& run);

// Parses a trajectory written by write_trajectory_csv; the sample rate is
// recovered from the time column. Throws std::runtime_error naming the
// offending column or line on malformed input.
TrajectoryRun read_trajectory_csv(const std::string& path);

// Generic table writer for field dumps and summaries.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace salp
