#include "ctgp/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ctgp/config.hpp"
#include "ctgp/errors.hpp"
#include "ctgp/experiment.hpp"
#include "ctgp/interp.hpp"
#include "ctgp/io.hpp"

namespace ctgp {
namespace {

namespace fs = std::filesystem;

/// Thrown after artifacts are written when the solver did not converge.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

std::string num(double v, const char* format = "%.9g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, format, v == 0.0 ? 0.0 : v);
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

Vector3d parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw InvalidArgument("--point expects x,y,z, got '" + text + "'");
    }
  }
  if (v.size() != 3) throw InvalidArgument("--point expects x,y,z, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string order;
};

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.order.empty()) cfg.order = parse_prior_order(f.order);
  cfg.validate();
  return cfg;
}

RunSummary summary_for(const ExperimentConfig& cfg, const EstimateOutput& est,
                       const GroundTruthTrajectory& gt, std::size_t measurements) {
  RunSummary s;
  s.config_hash = config_hash(cfg);
  s.seed = cfg.seed;
  s.order = to_string(est.order);
  s.descriptor = gt.descriptor;
  s.knots = est.solution.knots.size();
  s.measurements = measurements;
  s.report = est.solution.report;
  return s;
}

void write_estimate_dir(const ExperimentConfig& cfg, const EstimateOutput& est,
                        const GroundTruthTrajectory& gt, std::size_t measurements,
                        const fs::path& dir) {
  write_trajectory_csv((dir / "estimate.csv").string(), est.solution.knots,
                       est.order == PriorOrder::WNOJ);
  write_results(summary_for(cfg, est, gt, measurements), est.errors, dir.string());
}

void require_converged(const EstimateOutput& est) {
  if (!est.solution.report.converged) {
    throw SolverFailure(to_string(est.order) + " solver did not converge (status " +
                        est.solution.report.status + ")");
  }
}

void print_errors(std::ostream& out, const SegmentErrors& e) {
  out << "length_m  segments  error_percent\n";
  for (std::size_t i = 0; i < e.lengths.size(); ++i) {
    out << num(e.lengths[i], "%8.0f") << "  " << e.counts[i] << "  " << num(e.mean_percent[i], "%.4f")
        << "\n";
  }
  if (!e.empty()) out << "overall  " << e.total_count << "  " << num(e.overall_percent, "%.4f") << "\n";
}

int cmd_simulate(const CommonFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  const SimulationOutput sim = simulate(cfg, cfg.seed);
  const fs::path dir(f.out);
  write_ground_truth_csv((dir / "groundtruth.csv").string(), sim.ground_truth);
  write_measurements_csv((dir / "measurements.csv").string(), sim.measurements);
  out << "wrote " << sim.ground_truth.samples.size() << " ground-truth samples and "
      << sim.measurements.size() << " measurements to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_estimate(const CommonFlags& f, const std::string& input, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  const fs::path in(input);
  const GroundTruthTrajectory gt = read_ground_truth_csv((in / "groundtruth.csv").string());
  const std::vector<Measurement> ms = read_measurements_csv((in / "measurements.csv").string());
  const EstimateOutput est = run_estimate(cfg, cfg.order, gt, ms, cfg.seed);
  write_estimate_dir(cfg, est, gt, ms.size(), fs::path(f.out));
  out << to_string(est.order) << ": " << est.solution.report.iterations << " iterations, status "
      << est.solution.report.status << ", final cost " << num(est.solution.report.final_cost)
      << "\n";
  print_errors(out, est.errors);
  require_converged(est);
  return kExitOk;
}

int cmd_bias(double a, const std::string& point_text, const std::string& order_text,
             std::ostream& out) {
  const Vector3d point = parse_point(point_text);
  const PriorOrder order = parse_prior_order(order_text);
  const BiasExperimentResult r = run_bias_experiment(a, point, order);
  static const char* kNames[6] = {"rho_x", "rho_y", "rho_z", "phi_x", "phi_y", "phi_z"};
  out << "order " << to_string(order) << ", a = " << num(a) << ", point = [" << num(point(0))
      << ", " << num(point(1)) << ", " << num(point(2)) << "], m = " << num(r.m_denominator)
      << "\n";
  out << "dof      delta_xi          closed_form\n";
  for (int i = 0; i < 6; ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%-6s %16.9f %16.9f\n", kNames[i],
                  r.delta_xi(i) == 0.0 ? 0.0 : r.delta_xi(i),
                  r.closed_form(i) == 0.0 ? 0.0 : r.closed_form(i));
    out << line;
  }
  out << "delta_xi = [";
  for (int i = 0; i < 6; ++i) {
    // Round away solver round-off so an exact zero prints as 0.
    const double v = std::abs(r.delta_xi(i)) < 1e-12 ? 0.0 : r.delta_xi(i);
    out << (i ? ", " : "") << num(v, "%.8g");
  }
  out << "]\n";
  return kExitOk;
}

int cmd_evaluate(const CommonFlags& f, const std::string& estimate_path,
                 const std::string& gt_path, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  bool has_acc = false;
  const std::vector<Knot> knots = read_trajectory_csv(estimate_path, &has_acc);
  // An estimate with accelerations was produced under the jerk prior.
  const PriorOrder order = f.order.empty() ? (has_acc ? PriorOrder::WNOJ : PriorOrder::WNOA)
                                           : cfg.order;
  const GroundTruthTrajectory gt = read_ground_truth_csv(gt_path);
  std::vector<Pose> gt_poses;
  for (const TrajectorySample& s : gt.samples) gt_poses.push_back(s.pose);
  const SegmentErrors e = segment_translation_error(sample_estimate(order, knots, gt), gt_poses,
                                                    cfg.metric.segment_lengths);
  write_segment_errors_csv((fs::path(f.out) / "segment_errors.csv").string(), e);
  print_errors(out, e);
  return kExitOk;
}

int cmd_compare(const CommonFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  const CompareOutput c = run_compare(cfg, cfg.seed);
  const fs::path dir(f.out);
  const std::size_t n = c.sim.measurements.size();
  write_estimate_dir(cfg, c.wnoa, c.sim.ground_truth, n, dir / "wnoa");
  write_estimate_dir(cfg, c.wnoj, c.sim.ground_truth, n, dir / "wnoj");

  std::ostringstream table;
  table << "length_m,wnoa_percent,wnoj_percent\n";
  out << "length_m   wnoa_%     wnoj_%\n";
  for (std::size_t i = 0; i < c.wnoa.errors.lengths.size(); ++i) {
    const double L = c.wnoa.errors.lengths[i];
    std::string wnoj = "nan";
    for (std::size_t j = 0; j < c.wnoj.errors.lengths.size(); ++j) {
      if (c.wnoj.errors.lengths[j] == L) wnoj = num(c.wnoj.errors.mean_percent[j], "%.17g");
    }
    table << num(L, "%.17g") << "," << num(c.wnoa.errors.mean_percent[i], "%.17g") << "," << wnoj
          << "\n";
    char line[96];
    std::snprintf(line, sizeof line, "%8.0f %9.4f %10.4f\n", L, c.wnoa.errors.mean_percent[i],
                  wnoj == "nan" ? std::nan("") : std::stod(wnoj));
    out << line;
  }
  if (!c.wnoa.errors.empty() && !c.wnoj.errors.empty()) {
    table << "overall," << num(c.wnoa.errors.overall_percent, "%.17g") << ","
          << num(c.wnoj.errors.overall_percent, "%.17g") << "\n";
    char line[96];
    std::snprintf(line, sizeof line, " overall %9.4f %10.4f\n", c.wnoa.errors.overall_percent,
                  c.wnoj.errors.overall_percent);
    out << line;
  }
  {
    const std::string path = (dir / "compare.csv").string();
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << table.str();
    file.close();
    if (!file) throw IoError("failed writing '" + path + "'");
  }
  require_converged(c.wnoa);
  require_converged(c.wnoj);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuous-time trajectory estimation with Gaussian-process motion priors",
               "ctgp_cli"};
  app.require_subcommand(1, 1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub, bool with_out, bool with_order) {
    sub->add_option("--config", flags.config, "YAML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_value, "Random seed (overrides the config)");
    if (with_out) sub->add_option("--out", flags.out, "Output directory")->required();
    if (with_order) sub->add_option("--order", flags.order, "Prior order: wnoa or wnoj");
  };

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Generate ground truth and measurements");
  add_common(simulate_cmd, true, false);

  std::string input;
  CLI::App* estimate_cmd = app.add_subcommand("estimate", "Estimate a trajectory from measurements");
  add_common(estimate_cmd, true, true);
  estimate_cmd->add_option("--input", input, "Directory written by `simulate`")
      ->required()
      ->check(CLI::ExistingDirectory);

  double a = 0.0;
  std::string point;
  std::string bias_order = "wnoa";
  CLI::App* bias_cmd = app.add_subcommand("bias-demo", "One-step estimator bias experiment");
  bias_cmd->add_option("--a", a, "Forward acceleration")->required();
  bias_cmd->add_option("--point", point, "Observed point x,y,z in the body frame")->required();
  bias_cmd->add_option("--order", bias_order, "Prior order: wnoa or wnoj");

  std::string estimate_path;
  std::string gt_path;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Segment errors of an estimate");
  add_common(evaluate_cmd, true, true);
  evaluate_cmd->add_option("--estimate", estimate_path, "Estimated trajectory CSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--groundtruth", gt_path, "Ground-truth trajectory CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* compare_cmd = app.add_subcommand("compare", "Run both priors on the same data");
  add_common(compare_cmd, true, false);

  std::vector<std::string> storage{"ctgp_cli"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitInvalid;
  }

  for (CLI::App* sub : {simulate_cmd, estimate_cmd, evaluate_cmd, compare_cmd}) {
    if (sub->parsed() && sub->count("--seed") > 0) flags.seed = seed_value;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(flags, out);
    if (estimate_cmd->parsed()) return cmd_estimate(flags, input, out);
    if (bias_cmd->parsed()) return cmd_bias(a, point, bias_order, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(flags, estimate_path, gt_path, out);
    if (compare_cmd->parsed()) return cmd_compare(flags, out);
  } catch (const SolverFailure& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitSolver;
  } catch (const SingularSystem& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitInvalid;
  }
  err << "error: no subcommand given\n";
  return kExitInvalid;
}

}  // namespace ctgp
