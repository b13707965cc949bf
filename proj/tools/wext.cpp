// wext: metric extrapolation of Wasserstein geodesics between atomic measures.
// Subcommands: extrapolate, flow, quantize, certify.

#include <wext/exact_ot.hpp>
#include <wext/io.hpp>
#include <wext/isotonic.hpp>
#include <wext/jko.hpp>
#include <wext/qp_oracle.hpp>
#include <wext/sinkhorn.hpp>

#include "quantize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wext;

namespace {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::bad_input:
    case Errc::invalid_config:
    case Errc::empty_input:
      return 2;
    case Errc::no_convergence:
      return 4;
    default:
      return 3;
  }
}

struct SolverFlags {
  double t = 2.0;
  double epsilon = 1.0;
  double tau = 0.0;  // 0 = policy default
  double tol = 1e-7;
  int max_iter = 50000;
  std::string anneal;  // "factor,floor"
  uint64_t seed = 0;
  std::string out = "wext_out";

  void attach(CLI::App* cmd, bool with_t) {
    if (with_t) cmd->add_option("--t", t, "extrapolation time (t > 1, or t < 0 for the reversed direction)");
    cmd->add_option("--epsilon", epsilon, "entropic regularization (start value when annealing)")
        ->capture_default_str();
    cmd->add_option("--tau", tau, "gradient step size (default: adaptive)");
    cmd->add_option("--tol", tol, "stopping tolerance")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "iteration budget")->capture_default_str();
    cmd->add_option("--anneal", anneal, "geometric epsilon schedule 'factor,floor'");
    cmd->add_option("--seed", seed, "seed recorded in the manifest")->capture_default_str();
    cmd->add_option("--out", out, "output directory")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.t = t;
    cfg.epsilon = epsilon;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    if (tau > 0.0) cfg.tau = tau;
    if (!anneal.empty()) {
      AnnealSchedule sched;
      if (std::sscanf(anneal.c_str(), "%lf,%lf", &sched.factor, &sched.floor) != 2)
        throw Error(Errc::bad_input, "--anneal expects 'factor,floor'");
      cfg.anneal = sched;
    }
    return cfg;
  }

  json to_json() const {
    json j{{"t", t},       {"epsilon", epsilon}, {"tol", tol},
           {"max_iter", max_iter}, {"seed", seed},      {"out", out}};
    j["tau"] = tau > 0.0 ? json(tau) : json(nullptr);
    j["anneal"] = anneal.empty() ? json(nullptr) : json(anneal);
    return j;
  }
};

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(Errc::bad_input, "cannot create output directory " + dir.string());
  return dir;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream outf(path);
  if (!outf) throw Error(Errc::bad_input, "cannot write " + path.string());
  outf << doc.dump(2) << "\n";
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& inputs, const SolverFlags& flags, json extra = {}) {
  json doc{{"command", command},
           {"inputs", inputs},
           {"solver", flags.to_json()},
           {"out", fs::absolute(dir).string()},
           {"seed", flags.seed}};
  if (!extra.is_null()) doc["extra"] = std::move(extra);
  write_json(doc, dir / "manifest.json");
}

double eqbp_residual(double p_value, double g_value, const AtomicMeasure& nu0,
                     const AtomicMeasure& nu1, double t) {
  const double rhs = -g_value + second_moment(nu1) / (2.0 * (t - 1.0)) -
                     second_moment(nu0) / (2.0 * t);
  return std::abs(p_value - rhs);
}

int cmd_extrapolate(const std::string& nu0_path, const std::string& nu1_path,
                    const SolverFlags& flags) {
  AtomicMeasure nu0 = load_measure(nu0_path);
  AtomicMeasure nu1 = load_measure(nu1_path);

  double t = flags.t;
  bool swapped = false;
  if (t < 0.0) {
    // extrapolating backward in time is forward extrapolation of the
    // reversed pair at time 1 - t
    std::swap(nu0, nu1);
    t = 1.0 - t;
    swapped = true;
  } else if (t <= 1.0) {
    throw Error(Errc::bad_input, "--t must exceed 1 (or be negative for the reversed direction)");
  }

  SolverConfig cfg = flags.config();
  cfg.t = t;
  const ExtrapolationResult result = solve(nu0, nu1, cfg);

  const fs::path dir = prepare_out_dir(flags.out);
  save_measure(result.nu_t, dir / "nu_t.json");
  save_plan_csv(result.plan.entries, dir / "plan.csv");
  save_trace_csv(result.trace, dir / "trace.csv");

  json summary{{"p_value", result.p_value},
               {"primal_g", result.primal_g},
               {"eqbp_residual", eqbp_residual(result.p_value, result.primal_g, nu0, nu1, t)},
               {"converged", result.converged},
               {"iterations", result.iterations},
               {"dual_value", result.dual_value},
               {"epsilon_final", result.epsilon_final},
               {"t", t},
               {"swapped", swapped}};
  write_json(summary, dir / "summary.json");
  write_manifest(dir, "extrapolate",
                 json{{"nu0", fs::absolute(nu0_path).string()},
                      {"nu1", fs::absolute(nu1_path).string()}},
                 flags, json{{"t_solved", t}, {"swapped", swapped}});

  if (!result.converged) {
    std::cerr << "wext: not converged after " << result.iterations << " iterations\n";
    return 4;
  }
  std::cout << "p_value " << result.p_value << ", primal_g " << result.primal_g
            << ", iterations " << result.iterations << "\n";
  return 0;
}

AtomicMeasure direct_extrapolation(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                                   double t) {
  if (nu0.dim() == 1) return extrapolate_1d(nu0, nu1, t);
  FwOptions opts;
  opts.gap_tol = 1e-11;
  const FwReport fw = fw_solve(nu0, nu1, t, opts);
  const Matrix bary = column_barycenters(fw.plan.entries, nu0.points, nu1.weights);
  return AtomicMeasure{t * nu1.points - (t - 1.0) * bary, nu1.weights};
}

int cmd_flow(const std::string& nu0_path, const std::string& nu1_path, double h,
             double t_final, bool exact_1d, const SolverFlags& flags) {
  const AtomicMeasure nu0 = load_measure(nu0_path);
  const AtomicMeasure nu1 = load_measure(nu1_path);

  FlowConfig cfg;
  cfg.h = h;
  cfg.t_final = t_final;
  cfg.inner = flags.config();
  cfg.use_1d_exact = exact_1d;

  const std::vector<AtomicMeasure> traj = run_flow(nu0, nu1, cfg);

  const fs::path dir = prepare_out_dir(flags.out);
  char name[32];
  for (size_t n = 0; n < traj.size(); ++n) {
    std::snprintf(name, sizeof(name), "flow_%03zu.json", n);
    save_measure(traj[n], dir / name);
  }

  // flow vs direct extrapolation at matched times
  std::ofstream cmp(dir / "comparison.csv");
  if (!cmp) throw Error(Errc::bad_input, "cannot write comparison.csv");
  cmp << "step,t,w2_distance\n";
  char line[128];
  double max_dev = 0.0;
  for (size_t n = 1; n < traj.size(); ++n) {
    const double tn = 1.0 + double(n) * h;
    const AtomicMeasure direct = direct_extrapolation(nu0, nu1, tn);
    const double w2 = std::sqrt(std::max(0.0, w2_sq_exact(traj[n], direct).value));
    max_dev = std::max(max_dev, w2);
    std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g\n", n, tn, w2);
    cmp << line;
  }

  write_manifest(dir, "flow",
                 json{{"nu0", fs::absolute(nu0_path).string()},
                      {"nu1", fs::absolute(nu1_path).string()}},
                 flags,
                 json{{"h", h}, {"t_final", t_final}, {"exact_1d", exact_1d},
                      {"steps", traj.size() - 1}, {"max_deviation", max_dev}});
  std::cout << "flow steps " << traj.size() - 1 << ", max deviation from direct extrapolation "
            << max_dev << "\n";
  return 0;
}

Matrix load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::bad_input, "cannot open samples file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::bad_input, "ragged sample rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::empty_input, "no samples in " + path);
  Matrix samples(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    for (Eigen::Index j = 0; j < samples.cols(); ++j)
      samples(i, j) = rows[size_t(i)][size_t(j)];
  return samples;
}

int cmd_quantize(const std::string& samples_path, const std::string& shape,
                 Eigen::Index n_samples, Eigen::Index k, const SolverFlags& flags) {
  Matrix samples;
  if (!samples_path.empty())
    samples = load_samples_csv(samples_path);
  else if (!shape.empty())
    samples = tools::sample_shape(shape, n_samples, flags.seed);
  else
    throw Error(Errc::bad_input, "quantize needs --samples or --shape");

  const AtomicMeasure m = tools::quantize(samples, k, flags.seed);
  const fs::path dir = prepare_out_dir(flags.out);
  save_measure(m, dir / "quantized.json");
  write_manifest(dir, "quantize",
                 json{{"samples", samples_path}, {"shape", shape}}, flags,
                 json{{"k", k}, {"n_samples", samples.rows()}});
  std::cout << "quantized " << samples.rows() << " samples to " << k << " atoms\n";
  return 0;
}

int cmd_certify(const std::string& run_dir) {
  const fs::path dir(run_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw Error(Errc::bad_input, "cannot open " + (dir / "manifest.json").string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw Error(Errc::bad_input, std::string("bad manifest: ") + e.what());
  }
  if (manifest.value("command", "") != "extrapolate")
    throw Error(Errc::bad_input, "certify expects an extrapolate run directory");

  const AtomicMeasure nu0_orig = load_measure(manifest["inputs"]["nu0"].get<std::string>());
  const AtomicMeasure nu1_orig = load_measure(manifest["inputs"]["nu1"].get<std::string>());
  const bool swapped = manifest["extra"].value("swapped", false);
  const AtomicMeasure& nu0 = swapped ? nu1_orig : nu0_orig;
  const AtomicMeasure& nu1 = swapped ? nu0_orig : nu1_orig;
  const double t = manifest["extra"]["t_solved"].get<double>();

  std::ifstream sf(dir / "summary.json");
  if (!sf) throw Error(Errc::bad_input, "cannot open " + (dir / "summary.json").string());
  json summary;
  try {
    sf >> summary;
  } catch (const json::exception& e) {
    throw Error(Errc::bad_input, std::string("bad summary: ") + e.what());
  }

  ExtrapolationResult result;
  result.nu_t = load_measure(dir / "nu_t.json");
  TransportPlan plan{load_plan_csv(dir / "plan.csv"), nu0.weights, nu1.weights};
  // entropic plans meet the marginals only up to the run tolerance
  const double run_tol = manifest["solver"].value("tol", 1e-7);
  if (Errc c = validate(plan, std::max(kPlanMarginalTol, 100.0 * run_tol)); c != Errc::ok)
    throw Error(Errc::invalid_plan, "plan.csv does not match the input marginals");
  result.plan = std::move(plan);
  result.primal_g = primal_g(result.plan.entries, nu0.points, nu1.points, nu1.weights, t);
  const double w1 = w2_sq_exact(result.nu_t, nu1).value;
  const double w0 = w2_sq_exact(result.nu_t, nu0).value;
  result.p_value = w1 / (2.0 * (t - 1.0)) - w0 / (2.0 * t);

  const CertifyReport rep = certify_solution(result, nu0, nu1, t);

  const double eps_final = summary.value("epsilon_final", 1e-3);
  const double value_tol = std::max(1e-3, 5.0 * eps_final);
  const bool pass = rep.value_mismatch <= value_tol && rep.convex_order &&
                    rep.eqbp_residual <= value_tol && rep.fw_gap <= 1e-6;

  json cert{{"fw_value", rep.fw_value},
            {"fw_gap", rep.fw_gap},
            {"value_mismatch", rep.value_mismatch},
            {"convex_order", rep.convex_order},
            {"eqbp_residual", rep.eqbp_residual},
            {"thresholds", json{{"value_mismatch", value_tol},
                                {"eqbp_residual", value_tol},
                                {"fw_gap", 1e-6}}},
            {"pass", pass}};
  write_json(cert, dir / "certificate.json");
  std::cout << "certificate: " << (pass ? "pass" : "FAIL") << " (value mismatch "
            << rep.value_mismatch << ", value-identity residual " << rep.eqbp_residual
            << ", convex order " << (rep.convex_order ? "true" : "false") << ")\n";
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric extrapolation of Wasserstein geodesics for atomic measures"};
  app.set_help_flag("--help", "print help");  // frees -h for the flow step size
  app.require_subcommand(1);

  SolverFlags ex_flags;
  std::string ex_nu0, ex_nu1;
  CLI::App* ex = app.add_subcommand("extrapolate", "extrapolate nu_0 through nu_1 to time t");
  ex->add_option("--nu0", ex_nu0, "measure at time 0 (JSON)")->required();
  ex->add_option("--nu1", ex_nu1, "measure at time 1 (JSON)")->required();
  ex_flags.attach(ex, true);

  SolverFlags flow_flags;
  std::string flow_nu0, flow_nu1;
  double flow_h = 0.1, flow_tfinal = 4.0;
  bool flow_exact1d = false;
  CLI::App* fl = app.add_subcommand("flow", "JKO gradient flow of the opposite Wasserstein distance");
  fl->add_option("--nu0", flow_nu0, "attracting measure (JSON)")->required();
  fl->add_option("--nu1", flow_nu1, "initial measure (JSON)")->required();
  fl->add_option("--h", flow_h, "time step")->capture_default_str();
  fl->add_option("--t-final", flow_tfinal, "final time")->capture_default_str();
  fl->add_flag("--exact-1d", flow_exact1d, "use the exact 1D solver for the inner steps");
  flow_flags.attach(fl, false);

  SolverFlags q_flags;
  std::string q_samples, q_shape;
  Eigen::Index q_n = 4096, q_k = 16;
  CLI::App* qz = app.add_subcommand("quantize", "uniform-weight quantization of point samples");
  qz->add_option("--samples", q_samples, "CSV of sample points");
  qz->add_option("--shape", q_shape, "synthetic shape: square, disk, annulus, triangle");
  qz->add_option("--n-samples", q_n, "synthetic sample count")->capture_default_str();
  qz->add_option("--k", q_k, "number of atoms")->required();
  q_flags.attach(qz, false);

  std::string cert_dir;
  CLI::App* ct = app.add_subcommand("certify", "certify an extrapolate run directory");
  ct->add_option("--run", cert_dir, "extrapolate output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (ex->parsed()) return cmd_extrapolate(ex_nu0, ex_nu1, ex_flags);
    if (fl->parsed())
      return cmd_flow(flow_nu0, flow_nu1, flow_h, flow_tfinal, flow_exact1d, flow_flags);
    if (qz->parsed()) return cmd_quantize(q_samples, q_shape, q_n, q_k, q_flags);
    if (ct->parsed()) return cmd_certify(cert_dir);
  } catch (const Error& e) {
    std::cerr << "wext: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "wext: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
