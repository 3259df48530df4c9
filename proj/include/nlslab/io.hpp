#pragma once

#include <string>
#include <vector>

#include "nlslab/config.hpp"
#include "nlslab/dynamics.hpp"

// the vendored single-header json library
#include <json.hpp>

namespace nlslab {

using Json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Format a double so it round-trips exactly.
std::string format_double(double v);

/// Write a CSV with a provenance comment line:
///   # config_hash=... grid_hash=...
void write_csv(const std::string& path, const std::string& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

std::string provenance_comment(uint64_t config_hash, uint64_t grid_hash);

/// Binary columnar trajectory file.
/// Layout (little-endian):
///   "NLSB" | u32 version=1 | u64 config_hash | u64 grid_hash
///   | u32 d | u32 M | f64 R | f64 omega0 | f64 dt | u32 snapshot_count
///   then per snapshot: f64 t | M x (f64 re, f64 im).
struct TrajectoryHeader {
    uint64_t config_hash = 0;
    uint64_t grid_hash = 0;
    int d = 3;
    int M = 0;
    double R = 0.0;
    double omega0 = 0.0;
    double dt = 0.0;
};

void write_trajectory(const std::string& path, const TrajectoryHeader& header,
                      const Trajectory& traj);
std::pair<TrajectoryHeader, Trajectory> read_trajectory(const std::string& path);

bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace nlslab
