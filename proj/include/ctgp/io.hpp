#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctgp/factors.hpp"
#include "ctgp/metrics.hpp"
#include "ctgp/prior.hpp"
#include "ctgp/sim.hpp"
#include "ctgp/solver.hpp"

namespace ctgp {

/// Trajectory CSV.
///
/// Header `t,x,y,z,qx,qy,qz,qw,vx,vy,vz,wx,wy,wz` with optional trailing
/// `ax,ay,az,alx,aly,alz`. Each row stores the sensor pose in the reference
/// frame (the inverse of the estimator pose T): position x,y,z and orientation
/// as a unit quaternion in x,y,z,w order. v and w are the translational and
/// rotational parts of the body velocity varpi, a and al those of varpi_dot.
/// Values are written with 17 significant digits; quaternions are renormalized
/// on load.
void write_trajectory_csv(const std::string& path, const std::vector<Knot>& knots,
                          bool with_acceleration);
std::vector<Knot> read_trajectory_csv(const std::string& path, bool* has_acceleration = nullptr);

/// Dense ground truth in the same format (always with accelerations).
void write_ground_truth_csv(const std::string& path, const GroundTruthTrajectory& gt);
/// Reads a file written by write_ground_truth_csv back into samples.
GroundTruthTrajectory read_ground_truth_csv(const std::string& path);

/// Measurement CSV with header
/// `tau,px,py,pz,qx,qy,qz,kind,c0,c1,c2,c3,c4,c5`: p in the body frame, q in the
/// reference frame. For kind `point`, c0..c5 are R00,R01,R02,R11,R12,R22; for
/// kind `plane`, c0..c2 are the normal, c3 is beta and c4, c5 are zero.
void write_measurements_csv(const std::string& path, const std::vector<Measurement>& ms);
std::vector<Measurement> read_measurements_csv(const std::string& path);

struct RunSummary {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string order;
  std::string descriptor;
  std::size_t knots = 0;
  std::size_t measurements = 0;
  SolveReport report;
};

/// Writes `<dir>/segment_errors.csv` (columns length_m,segments,error_percent,
/// one row per length plus an `overall` row) and `<dir>/summary.json`.
/// Creates `dir` if needed; throws IoError on failure.
void write_results(const RunSummary& summary, const SegmentErrors& metrics, const std::string& dir);

/// Writes only the segment-error CSV.
void write_segment_errors_csv(const std::string& path, const SegmentErrors& metrics);

}  // namespace ctgp
