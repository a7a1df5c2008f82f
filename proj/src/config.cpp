#include "ctgp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ctgp/errors.hpp"

namespace ctgp {
namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError("field '" + field + "' must be a scalar" + where(node));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("field '" + field + "' has an invalid value '" + node.Scalar() + "'" +
                      where(node));
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError("field '" + field + "' must be a list" + where(node));
  std::vector<double> out;
  for (const YAML::Node& item : node) out.push_back(scalar<double>(item, field));
  return out;
}

Vector6d vector6(const YAML::Node& node, const std::string& field) {
  const std::vector<double> v = number_list(node, field);
  if (v.size() != 6) {
    throw ConfigError("field '" + field + "' must have 6 entries, got " +
                      std::to_string(v.size()) + where(node));
  }
  return Vector6d(v.data());
}

/// A Q_c diagonal; checked here as well as in validate() so the error carries a line number.
Vector6d qc_vector(const YAML::Node& node, const std::string& field) {
  const Vector6d v = vector6(node, field);
  if (!(v.array() > 0.0).all() || !v.allFinite()) {
    throw ConfigError("invalid value for '" + field + "': entries must be finite and > 0" +
                      where(node));
  }
  return v;
}

using Handler = std::function<void(const YAML::Node&)>;

/// Dispatches every key of a mapping to its handler; unknown keys are errors.
void read_section(const YAML::Node& node, const std::string& section,
                  const std::map<std::string, Handler>& handlers) {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) {
    throw ConfigError("section '" + section + "' must be a mapping" + where(node));
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
      const std::string path = section.empty() ? key : section + "." + key;
      throw ConfigError("unknown key '" + path + "'" + where(kv.first));
    }
    it->second(kv.second);
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("invalid value for '" + field + "': " + what);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Vector6d ExperimentConfig::default_qc(PriorOrder order) {
  // Each value is the best of a per-order sweep on the default urban profile.
  return Vector6d::Constant(order == PriorOrder::WNOA ? 0.03 : 0.1);
}

PriorConfig ExperimentConfig::prior(PriorOrder which) const {
  PriorConfig p;
  p.order = which;
  p.qc_diag = which == PriorOrder::WNOA ? qc_wnoa : qc_wnoj;
  return p;
}

void ExperimentConfig::validate() const {
  for (int k = 0; k < 6; ++k) {
    require(qc_wnoa(k) > 0.0 && std::isfinite(qc_wnoa(k)), "prior.qc_diag_wnoa",
            "entries must be finite and > 0");
    require(qc_wnoj(k) > 0.0 && std::isfinite(qc_wnoj(k)), "prior.qc_diag_wnoj",
            "entries must be finite and > 0");
  }
  require(sim.profile == "urban" || sim.profile == "prior", "sim.profile",
          "expected 'urban' or 'prior'");
  require(sim.duration > 0.0, "sim.duration", "must be > 0");
  require(sim.sample_rate > 0.0, "sim.sample_rate", "must be > 0");
  require(sim.world.landmarks >= 1, "sim.landmarks", "must be >= 1");
  require(sim.world.box_margin >= 0.0, "sim.box_margin", "must be >= 0");
  require(sim.world.sensor_range > 0.0, "sim.sensor_range", "must be > 0");
  require(sim.world.noise_std >= 0.0, "sim.noise_std", "must be >= 0");
  require(sim.world.measurement_rate > 0.0, "sim.measurement_rate", "must be > 0");
  require(sim.init_translation_std >= 0.0, "sim.init_translation_std", "must be >= 0");
  require(sim.init_rotation_std >= 0.0, "sim.init_rotation_std", "must be >= 0");
  require(sim.init_velocity_std >= 0.0, "sim.init_velocity_std", "must be >= 0");
  require(solver.knot_spacing > 0.0, "solver.knot_spacing", "must be > 0");
  require(solver.max_iterations >= 0, "solver.max_iterations", "must be >= 0");
  require(solver.tolerance >= 0.0, "solver.tolerance", "must be >= 0");
  require(solver.threads >= 1, "solver.threads", "must be >= 1");
  const auto& L = metric.segment_lengths;
  require(!L.empty(), "metric.segment_lengths", "must not be empty");
  for (std::size_t i = 0; i < L.size(); ++i) {
    require(L[i] > 0.0, "metric.segment_lengths", "entries must be > 0");
    require(i == 0 || L[i] > L[i - 1], "metric.segment_lengths", "must be strictly increasing");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }

  ExperimentConfig cfg;
  auto num = [](double& dst, const std::string& f) {
    return [&dst, f](const YAML::Node& n) { dst = scalar<double>(n, f); };
  };
  auto integer = [](int& dst, const std::string& f) {
    return [&dst, f](const YAML::Node& n) { dst = scalar<int>(n, f); };
  };

  // qc_diag sets both orders; the per-order keys set one each.
  bool shared_qc = false;
  YAML::Node per_order_qc;
  read_section(root, "",
               {
                   {"seed", [&](const YAML::Node& n) { cfg.seed = scalar<std::uint64_t>(n, "seed"); }},
                   {"prior",
                    [&](const YAML::Node& n) {
                      read_section(
                          n, "prior",
                          {{"order",
                            [&](const YAML::Node& v) {
                              try {
                                cfg.order = parse_prior_order(scalar<std::string>(v, "prior.order"));
                              } catch (const InvalidArgument& e) {
                                throw ConfigError(std::string(e.what()) + where(v));
                              }
                            }},
                           {"qc_diag",
                            [&](const YAML::Node& v) {
                              cfg.qc_wnoa = cfg.qc_wnoj = qc_vector(v, "prior.qc_diag");
                              shared_qc = true;
                            }},
                           {"qc_diag_wnoa",
                            [&](const YAML::Node& v) {
                              cfg.qc_wnoa = qc_vector(v, "prior.qc_diag_wnoa");
                              per_order_qc = v;
                            }},
                           {"qc_diag_wnoj",
                            [&](const YAML::Node& v) {
                              cfg.qc_wnoj = qc_vector(v, "prior.qc_diag_wnoj");
                              per_order_qc = v;
                            }}});
                      if (shared_qc && per_order_qc.IsSequence()) {
                        throw ConfigError("'prior.qc_diag' cannot be combined with a per-order qc_diag" +
                                          where(per_order_qc));
                      }
                    }},
                   {"sim",
                    [&](const YAML::Node& n) {
                      SimSettings& s = cfg.sim;
                      read_section(
                          n, "sim",
                          {{"profile",
                            [&](const YAML::Node& v) { s.profile = scalar<std::string>(v, "sim.profile"); }},
                           {"duration", num(s.duration, "sim.duration")},
                           {"sample_rate", num(s.sample_rate, "sim.sample_rate")},
                           {"landmarks", integer(s.world.landmarks, "sim.landmarks")},
                           {"box_margin", num(s.world.box_margin, "sim.box_margin")},
                           {"sensor_range", num(s.world.sensor_range, "sim.sensor_range")},
                           {"noise_std", num(s.world.noise_std, "sim.noise_std")},
                           {"measurement_rate", num(s.world.measurement_rate, "sim.measurement_rate")},
                           {"measurement_kind",
                            [&](const YAML::Node& v) {
                              const std::string kind = scalar<std::string>(v, "sim.measurement_kind");
                              if (kind == "point") {
                                s.world.kind = MeasurementKindChoice::Point;
                              } else if (kind == "plane") {
                                s.world.kind = MeasurementKindChoice::Plane;
                              } else {
                                throw ConfigError("invalid value for 'sim.measurement_kind': '" +
                                                  kind + "' (expected point or plane)" + where(v));
                              }
                            }},
                           {"init_translation_std", num(s.init_translation_std, "sim.init_translation_std")},
                           {"init_rotation_std", num(s.init_rotation_std, "sim.init_rotation_std")},
                           {"init_velocity_std", num(s.init_velocity_std, "sim.init_velocity_std")}});
                    }},
                   {"solver",
                    [&](const YAML::Node& n) {
                      SolverSettings& s = cfg.solver;
                      read_section(n, "solver",
                                   {{"knot_spacing", num(s.knot_spacing, "solver.knot_spacing")},
                                    {"max_iterations", integer(s.max_iterations, "solver.max_iterations")},
                                    {"tolerance", num(s.tolerance, "solver.tolerance")},
                                    {"robust",
                                     [&](const YAML::Node& v) { s.robust = scalar<bool>(v, "solver.robust"); }},
                                    {"threads", integer(s.threads, "solver.threads")}});
                    }},
                   {"metric",
                    [&](const YAML::Node& n) {
                      read_section(n, "metric",
                                   {{"segment_lengths", [&](const YAML::Node& v) {
                                       cfg.metric.segment_lengths =
                                           number_list(v, "metric.segment_lengths");
                                     }}});
                    }},
               });
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto vec = [](const auto& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(v.size()); ++i) {
      if (i) s += ",";
      s += fmt(v[i]);
    }
    return s + "]";
  };
  out << "seed=" << cfg.seed << "\n"
      << "prior.order=" << to_string(cfg.order) << "\n"
      << "prior.qc_diag_wnoa=" << vec(cfg.qc_wnoa) << "\n"
      << "prior.qc_diag_wnoj=" << vec(cfg.qc_wnoj) << "\n"
      << "sim.profile=" << cfg.sim.profile << "\n"
      << "sim.duration=" << fmt(cfg.sim.duration) << "\n"
      << "sim.sample_rate=" << fmt(cfg.sim.sample_rate) << "\n"
      << "sim.landmarks=" << cfg.sim.world.landmarks << "\n"
      << "sim.box_margin=" << fmt(cfg.sim.world.box_margin) << "\n"
      << "sim.sensor_range=" << fmt(cfg.sim.world.sensor_range) << "\n"
      << "sim.noise_std=" << fmt(cfg.sim.world.noise_std) << "\n"
      << "sim.measurement_rate=" << fmt(cfg.sim.world.measurement_rate) << "\n"
      << "sim.measurement_kind="
      << (cfg.sim.world.kind == MeasurementKindChoice::Point ? "point" : "plane") << "\n"
      << "sim.init_translation_std=" << fmt(cfg.sim.init_translation_std) << "\n"
      << "sim.init_rotation_std=" << fmt(cfg.sim.init_rotation_std) << "\n"
      << "sim.init_velocity_std=" << fmt(cfg.sim.init_velocity_std) << "\n"
      << "solver.knot_spacing=" << fmt(cfg.solver.knot_spacing) << "\n"
      << "solver.max_iterations=" << cfg.solver.max_iterations << "\n"
      << "solver.tolerance=" << fmt(cfg.solver.tolerance) << "\n"
      << "solver.robust=" << (cfg.solver.robust ? "true" : "false") << "\n"
      << "solver.threads=" << cfg.solver.threads << "\n"
      << "metric.segment_lengths=" << vec(cfg.metric.segment_lengths) << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace ctgp
