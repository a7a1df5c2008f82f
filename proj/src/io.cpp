#include "ctgp/io.hpp"

#include <Eigen/Geometry>
#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctgp/errors.hpp"

namespace ctgp {
namespace {

const char* kTrajectoryHeader = "t,x,y,z,qx,qy,qz,qw,vx,vy,vz,wx,wy,wz";
const char* kAccelerationHeader = ",ax,ay,az,alx,aly,alz";
const char* kMeasurementHeader = "tau,px,py,pz,qx,qy,qz,kind,c0,c1,c2,c3,c4,c5";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw IoError(path + ":" + std::to_string(line) + ": invalid number '" + s + "'");
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

/// Row fields for one state: time, sensor pose in the reference frame, velocity, acceleration.
std::string state_row(double t, const Pose& T, const Vector6d& vel, const Vector6d* acc) {
  const Pose P = T.inverse();
  Eigen::Quaterniond q(P.rotation());
  q.normalize();
  std::string row = fmt(t);
  for (int i = 0; i < 3; ++i) row += "," + fmt(P.translation()(i));
  row += "," + fmt(q.x()) + "," + fmt(q.y()) + "," + fmt(q.z()) + "," + fmt(q.w());
  for (int i = 0; i < 6; ++i) row += "," + fmt(vel(i));
  if (acc) {
    for (int i = 0; i < 6; ++i) row += "," + fmt((*acc)(i));
  }
  return row;
}

Knot parse_state(const std::vector<std::string>& f, bool with_acc, const std::string& path,
                 std::size_t line) {
  const std::size_t expected = with_acc ? 20 : 14;
  if (f.size() != expected) {
    throw IoError(path + ":" + std::to_string(line) + ": expected " + std::to_string(expected) +
                  " fields, got " + std::to_string(f.size()));
  }
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = parse_double(f[i], path, line);
  Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
  if (!(q.norm() > 0.5)) {
    throw IoError(path + ":" + std::to_string(line) + ": quaternion is not close to unit length");
  }
  q.normalize();
  const Pose P(q.toRotationMatrix(), Vector3d(v[1], v[2], v[3]));
  Knot k;
  k.t = v[0];
  k.pose = P.inverse();
  for (int i = 0; i < 6; ++i) k.velocity(i) = v[8 + i];
  if (with_acc) {
    for (int i = 0; i < 6; ++i) k.acceleration(i) = v[14 + i];
  }
  return k;
}

std::vector<Knot> read_states(const std::string& path, bool* has_acc) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  line = strip_cr(line);
  bool with_acc = false;
  if (line == std::string(kTrajectoryHeader) + kAccelerationHeader) {
    with_acc = true;
  } else if (line != kTrajectoryHeader) {
    throw IoError(path + ":1: unexpected header '" + line + "'");
  }
  std::vector<Knot> knots;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    knots.push_back(parse_state(split(line), with_acc, path, lineno));
  }
  if (has_acc) *has_acc = with_acc;
  return knots;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const std::vector<Knot>& knots,
                          bool with_acceleration) {
  std::ofstream out = open_out(path);
  out << kTrajectoryHeader << (with_acceleration ? kAccelerationHeader : "") << "\n";
  for (const Knot& k : knots) {
    out << state_row(k.t, k.pose, k.velocity, with_acceleration ? &k.acceleration : nullptr)
        << "\n";
  }
  close_out(out, path);
}

std::vector<Knot> read_trajectory_csv(const std::string& path, bool* has_acceleration) {
  return read_states(path, has_acceleration);
}

void write_ground_truth_csv(const std::string& path, const GroundTruthTrajectory& gt) {
  std::ofstream out = open_out(path);
  out << kTrajectoryHeader << kAccelerationHeader << "\n";
  for (const TrajectorySample& s : gt.samples) {
    out << state_row(s.t, s.pose, s.velocity, &s.acceleration) << "\n";
  }
  close_out(out, path);
}

GroundTruthTrajectory read_ground_truth_csv(const std::string& path) {
  bool has_acc = false;
  const std::vector<Knot> states = read_states(path, &has_acc);
  GroundTruthTrajectory gt;
  gt.descriptor = "file:" + path;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i > 0 && !(states[i].t > states[i - 1].t)) {
      throw IoError(path + ": sample times must be strictly increasing");
    }
    gt.samples.push_back({states[i].t, states[i].pose, states[i].velocity, states[i].acceleration});
  }
  if (gt.samples.empty()) throw IoError(path + ": no samples");
  return gt;
}

void write_measurements_csv(const std::string& path, const std::vector<Measurement>& ms) {
  std::ofstream out = open_out(path);
  out << kMeasurementHeader << "\n";
  for (const Measurement& m : ms) {
    std::string row = fmt(m.tau);
    for (int i = 0; i < 3; ++i) row += "," + fmt(m.p(i));
    for (int i = 0; i < 3; ++i) row += "," + fmt(m.q(i));
    if (const auto* plane = std::get_if<PlaneKind>(&m.kind)) {
      row += ",plane";
      for (int i = 0; i < 3; ++i) row += "," + fmt(plane->n(i));
      row += "," + fmt(plane->beta) + ",0,0";
    } else {
      const Matrix3d& R = std::get<PointKind>(m.kind).R;
      row += ",point," + fmt(R(0, 0)) + "," + fmt(R(0, 1)) + "," + fmt(R(0, 2)) + "," +
             fmt(R(1, 1)) + "," + fmt(R(1, 2)) + "," + fmt(R(2, 2));
    }
    out << row << "\n";
  }
  close_out(out, path);
}

std::vector<Measurement> read_measurements_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kMeasurementHeader) {
    throw IoError(path + ":1: unexpected or missing header");
  }
  std::vector<Measurement> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 14) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 14 fields");
    }
    auto num = [&](std::size_t i) { return parse_double(f[i], path, lineno); };
    Measurement m;
    m.tau = num(0);
    m.p << num(1), num(2), num(3), 1.0;
    m.q << num(4), num(5), num(6), 1.0;
    if (f[7] == "plane") {
      PlaneKind plane;
      plane.n << num(8), num(9), num(10);
      plane.beta = num(11);
      m.kind = plane;
    } else if (f[7] == "point") {
      PointKind point;
      point.R << num(8), num(9), num(10),
                 num(9), num(11), num(12),
                 num(10), num(12), num(13);
      m.kind = point;
    } else {
      throw IoError(path + ":" + std::to_string(lineno) + ": unknown kind '" + f[7] + "'");
    }
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(m);
  }
  return out;
}

void write_segment_errors_csv(const std::string& path, const SegmentErrors& metrics) {
  std::ofstream out = open_out(path);
  out << "length_m,segments,error_percent\n";
  for (std::size_t i = 0; i < metrics.lengths.size(); ++i) {
    out << fmt(metrics.lengths[i]) << "," << metrics.counts[i] << ","
        << fmt(metrics.mean_percent[i]) << "\n";
  }
  if (!metrics.empty()) {
    out << "overall," << metrics.total_count << "," << fmt(metrics.overall_percent) << "\n";
  }
  close_out(out, path);
}

void write_results(const RunSummary& summary, const SegmentErrors& metrics,
                   const std::string& dir) {
  const std::filesystem::path base(dir);
  write_segment_errors_csv((base / "segment_errors.csv").string(), metrics);

  nlohmann::ordered_json j;
  j["config_hash"] = summary.config_hash;
  j["seed"] = summary.seed;
  j["order"] = summary.order;
  j["trajectory"] = summary.descriptor;
  j["knots"] = summary.knots;
  j["measurements"] = summary.measurements;
  j["iterations"] = summary.report.iterations;
  j["converged"] = summary.report.converged;
  j["status"] = summary.report.status;
  j["initial_cost"] = summary.report.initial_cost;
  j["final_cost"] = summary.report.final_cost;
  j["cost_trace"] = summary.report.cost_trace;
  j["overall_error_percent"] = metrics.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(metrics.overall_percent);

  const std::string path = (base / "summary.json").string();
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  close_out(out, path);
}

}  // namespace ctgp
