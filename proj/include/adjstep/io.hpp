/// @file io.hpp
/// @brief Binary containers for trajectories and dual solutions, and the CSV tables of a run.
#pragma once

#include "adjstep/adjoint.hpp"
#include "adjstep/forward.hpp"
#include "adjstep/functional.hpp"
#include "adjstep/indicator.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace adjstep {

inline constexpr std::uint32_t kArtifactVersion = 1;

/// FNV-1a over a byte range, continuing from `seed`.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);

/// Writes the trajectory container; returns its checksum (the run hash).
std::uint64_t write_trajectory(const std::string& path, const Trajectory& traj);
/// Throws ArtifactError on bad magic, version or checksum.
Trajectory read_trajectory(const std::string& path, std::uint64_t* checksum = nullptr);

struct DualHeader {
  std::uint64_t mesh_hash = 0;
  std::uint64_t source_checksum = 0;  ///< checksum of the trajectory the dual was computed from
};

std::uint64_t write_dual(const std::string& path, const DualSolution& dual, const DualHeader& header);
DualSolution read_dual(const std::string& path, DualHeader* header = nullptr);

/// 17 significant digits.
std::string format_double(double v);

void write_stats_csv(std::ostream& os, const Trajectory& traj);
void write_functional_csv(std::ostream& os, const std::vector<TracePoint>& trace);
void write_indicators_csv(std::ostream& os, const ErrorBreakdown& b);
std::vector<IntervalIndicator> read_indicators_csv(std::istream& is);
void write_dual_norms_csv(std::ostream& os, const DualSolution& dual, const std::vector<double>& norms);
void write_summary(std::ostream& os, const ErrorBreakdown& b);

/// Reads functional.csv back (t, integrand, cumulative).
std::vector<TracePoint> read_functional_csv(std::istream& is);

}  // namespace adjstep
