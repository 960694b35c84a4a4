// anigrowth: estimate growth parameters from matched minutiae, run the
// anisotropy tests, simulate studies and sweep detection thresholds.
//
// Exit codes: 0 success, 1 usage, 2 data (parse / I/O), 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "anigrowth/anigrowth.hpp"
#include "json.hpp"

namespace ag = anigrowth;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Globals {
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
  std::string format = "csv";
};

// Writes to --output when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.output, std::ios::binary | std::ios::trunc);
  if (!out) throw ag::IoError("cannot open '" + g.output + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ag::IoError("write to '" + g.output + "' failed");
}

json estimates_json(const ag::EstimateTable& table) {
  json rows = json::array();
  for (const auto& [key, r] : table) {
    rows.push_back({{"finger_id", key.finger},
                    {"impression_id", key.impression},
                    {"gamma_hat", r.params.gamma},
                    {"beta_hat", r.params.beta},
                    {"tau_hat", r.params.tau},
                    {"lambda_hat", r.params.lambda},
                    {"n", r.n},
                    {"iterations", r.iterations},
                    {"final_F", r.final_objective},
                    {"converged", r.converged}});
  }
  return rows;
}

std::pair<ag::SimConfig, ag::NoiseModel> sim_setup(const std::string& config_path, std::uint64_t seed) {
  auto setup = config_path.empty() ? std::pair{ag::SimConfig{}, ag::NoiseModel{}} : ag::load_sim_config(config_path);
  setup.first.seed = seed;
  return setup;
}

ag::ConcentrationScale parse_scale(const std::string& s) {
  if (s == "total") return ag::ConcentrationScale::total_resultant;
  if (s == "mean") return ag::ConcentrationScale::mean_resultant;
  throw ag::InvalidInput("concentration must be 'total' or 'mean'");
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  double epsilon = ag::SolverConfig{}.epsilon;
  int max_iterations = ag::SolverConfig{}.max_iterations;
};

int run_estimate(const Globals& g, const EstimateArgs& a) {
  const ag::StudyDataset data = ag::load_study(a.input);
  const ag::SolverConfig solver{a.epsilon, a.max_iterations};
  std::size_t failed = 0;
  const ag::EstimateTable table = ag::estimate_study(data, solver, [&](const ag::PairKey& k, const std::exception& e) {
    ++failed;
    std::cerr << "pair (" << k.finger << "," << k.impression << "): " << e.what() << '\n';
  });
  for (const auto& [k, r] : table) {
    if (!r.converged) std::cerr << "pair (" << k.finger << "," << k.impression << "): not converged\n";
  }
  std::ostringstream out;
  if (g.format == "json") {
    out << estimates_json(table).dump(2) << '\n';
  } else {
    ag::write_estimates(out, table);
  }
  emit(g, out.str());
  return failed > 0 ? kNumerical : kOk;
}

struct TestArgs {
  std::string estimates;
  std::string test;
  double alpha = 0.05;
  double epsilon = 0.15;
  int bootstrap = 100;
  std::string reference_estimates;
  std::string reference_config;
  bool simulate_reference = false;
  std::string data;  // matched pairs, for the joint test
  int replicates = 1000;
  std::string concentration = "total";
};

int run_test(const Globals& g, const TestArgs& a) {
  const ag::TestId id = ag::parse_test_id(a.test);
  const ag::EstimateTable table = ag::load_estimates(a.estimates);
  if (table.empty()) throw ag::InvalidInput("no estimates in '" + a.estimates + "'");
  ag::DistalTestConfig distal;
  distal.epsilon = a.epsilon;
  distal.alpha = a.alpha;
  distal.bootstrap_b = a.bootstrap;
  distal.scale = parse_scale(a.concentration);
  ag::TestReport report;
  switch (id) {
    case ag::TestId::rayleigh:
      report = ag::test_rayleigh(ag::doubled_axes(table), a.alpha);
      break;
    case ag::TestId::tau_ks: {
      std::vector<double> reference;
      if (!a.reference_estimates.empty()) {
        reference = ag::column_tau(ag::load_estimates(a.reference_estimates));
      } else if (!a.reference_config.empty() || a.simulate_reference) {
        const auto [cfg, noise] = sim_setup(a.reference_config, g.seed);
        reference = ag::reference_tau_sample(cfg, noise).tau;
      } else {
        throw CLI::ValidationError("tau_ks needs --reference-estimates, --reference-config or --simulate-reference");
      }
      report = ag::test_tau_ks(ag::column_tau(table), reference, a.alpha);
      break;
    }
    case ag::TestId::joint: {
      if (a.data.empty()) throw CLI::ValidationError("joint needs --data with the matched pairs");
      const ag::StudyDataset data = ag::load_study(a.data);
      const auto [cfg, noise] = sim_setup(a.reference_config, g.seed);
      const auto replicates = ag::simulate_joint_replicates(cfg, noise, a.replicates);
      const auto rect = ag::build_confidence_rectangle(replicates, a.alpha);
      report = ag::test_joint(ag::joint_statistic(data, table), rect, a.alpha);
      break;
    }
    case ag::TestId::distal_vm:
      report = ag::test_distal_vm(ag::doubled_axes(table), distal);
      break;
    case ag::TestId::distal_boot:
      report = ag::test_distal_boot(ag::doubled_axes(table), distal, g.seed);
      break;
  }
  const std::string text = ag::to_json(report).dump(2) + '\n';
  std::cout << text;
  if (!g.output.empty()) emit(g, text);
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::string preset = "null";
  double tau = 0.0;
  double gamma = 0.0;
  double lambda = 1.0;
  double tau_sd = 0.0;
  double lambda_sd = 0.0;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  ag::StudyDataset data;
  if (a.preset == "standin") {
    ag::StandinConfig cfg = ag::StandinConfig::default_preset(g.seed);
    if (!a.config.empty()) std::tie(cfg.sim, cfg.noise) = sim_setup(a.config, g.seed);
    data = ag::simulate_standin(cfg);
  } else if (a.preset == "null") {
    const auto [cfg, noise] = sim_setup(a.config, g.seed);
    data = ag::simulate_null_study(cfg, noise);
  } else {
    throw ag::InvalidInput("unknown preset '" + a.preset + "'");
  }
  const bool grows = a.tau != 0.0 || a.lambda != 1.0 || a.tau_sd != 0.0 || a.lambda_sd != 0.0;
  if (grows) {
    const ag::GrowthSpec spec = ag::GrowthSpec::variable(a.tau, a.tau_sd, a.gamma, a.lambda, a.lambda_sd);
    if (!(a.tau >= 0.0) || !(a.lambda > 0.0)) throw ag::InvalidInput("growth needs tau >= 0 and lambda > 0");
    ag::StudyDataset grown;
    for (const auto& [key, pair] : data) {
      ag::Rng rng = ag::task_rng(ag::mix_seed(g.seed, 0x6A0ULL), static_cast<std::uint64_t>(key.finger),
                                 static_cast<std::uint64_t>(key.impression));
      grown.add(key, ag::MatchedPair(pair.reference, ag::inject_growth(pair.reference, pair.query, spec, rng)));
    }
    data = std::move(grown);
  }
  std::ostringstream out;
  ag::write_study(out, data);
  emit(g, out.str());
  return kOk;
}

struct SweepArgs {
  std::string test = "rayleigh";
  std::string data;
  std::string preset = "standin";
  int gamma_count = 20;
  double tau_first = 0.002;
  double tau_last = 0.2;
  double tau_step = 0.002;
  double alpha = 0.05;
  double epsilon = 0.15;
  std::string reference_config;
};

int run_sweep(const Globals& g, const SweepArgs& a) {
  ag::StudyDataset data;
  if (!a.data.empty()) {
    data = ag::load_study(a.data);
  } else if (a.preset == "standin") {
    data = ag::simulate_standin(ag::StandinConfig::default_preset(g.seed));
  } else if (a.preset == "null") {
    data = ag::simulate_null_study(sim_setup(a.reference_config, g.seed).first, ag::NoiseModel{});
  } else {
    throw ag::InvalidInput("unknown preset '" + a.preset + "'");
  }
  if (a.gamma_count < 1) throw ag::InvalidInput("gamma count must be >= 1");
  ag::SweepSpec spec;
  spec.gamma_grid = ag::SweepSpec::uniform_gamma_grid(a.gamma_count);
  spec.tau_grid = ag::SweepSpec::linear_grid(a.tau_first, a.tau_last, a.tau_step);
  spec.test = ag::parse_test_id(a.test);
  spec.alpha = a.alpha;
  spec.seed = g.seed;
  spec.distal.epsilon = a.epsilon;
  std::vector<double> reference;
  if (spec.test == ag::TestId::tau_ks) {
    const auto [cfg, noise] = sim_setup(a.reference_config, ag::mix_seed(g.seed, 0x2EFULL));
    reference = ag::reference_tau_sample(cfg, noise).tau;
  }
  const auto points = ag::sweep_min_tau(data, spec, reference);
  std::ostringstream out;
  if (g.format == "json") {
    json pts = json::array();
    for (const auto& p : points) {
      pts.push_back({{"gamma", p.gamma}, {"tau_min", p.tau_min ? json(*p.tau_min) : json(ag::kAboveGrid)}});
    }
    json doc = {{"test_id", a.test},
                {"alpha", a.alpha},
                {"seed", g.seed},
                {"tau_grid", {{"first", a.tau_first}, {"last", a.tau_last}, {"step", a.tau_step}}},
                {"search", "grid-ascending; rejection need not be monotone in tau"},
                {"points", pts}};
    out << doc.dump(2) << '\n';
  } else {
    ag::write_sweep(out, points);
  }
  emit(g, out.str());
  return kOk;
}

int run_align_precision(const Globals& g, const std::string& estimates) {
  const ag::EstimateTable table = ag::load_estimates(estimates);
  const std::vector<double> beta = ag::column_beta(table);
  if (beta.empty()) throw ag::InvalidInput("no rotation estimates in '" + estimates + "'");
  const double eta = ag::estimate_alignment_precision(beta);
  const ag::FiveNumberSummary s = ag::five_number_summary(beta);
  std::cout << json{{"eta", eta}, {"epsilon", 2.0 * eta}, {"n", beta.size()}}.dump(2) << '\n';
  std::ostringstream out;
  if (g.format == "json") {
    out << json{{"min", s.minimum}, {"q1", s.lower_quartile}, {"median", s.median}, {"q3", s.upper_quartile},
                {"max", s.maximum}}
               .dump(2)
        << '\n';
  } else {
    ag::write_five_number(out, s);
  }
  if (!g.output.empty()) emit(g, out.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic growth estimation and tests for matched minutiae"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--output", g.output, "Output file (default stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Fit (gamma, beta, tau, lambda) to every matched pair");
  c_est->add_option("input", est.input, "Matched-pairs CSV")->required();
  c_est->add_option("--epsilon", est.epsilon, "Stop when squared parameter increments fall below this")
      ->capture_default_str();
  c_est->add_option("--max-iterations", est.max_iterations)->capture_default_str();

  TestArgs tst;
  auto* c_test = app.add_subcommand("test", "Run one anisotropy test on an estimates CSV");
  c_test->add_option("estimates", tst.estimates, "Estimates CSV")->required();
  c_test->add_option("--test", tst.test)
      ->required()
      ->check(CLI::IsMember({"rayleigh", "tau_ks", "joint", "distal_vm", "distal_boot"}));
  c_test->add_option("--alpha", tst.alpha)->capture_default_str();
  c_test->add_option("--epsilon", tst.epsilon, "Distal accuracy on the doubled-angle scale")->capture_default_str();
  c_test->add_option("--bootstrap", tst.bootstrap, "Bootstrap resamples B")->capture_default_str();
  c_test->add_option("--reference-estimates", tst.reference_estimates, "Estimates CSV whose tau column is the reference");
  c_test->add_option("--reference-config", tst.reference_config, "Simulation config JSON for reference samples");
  c_test->add_flag("--simulate-reference", tst.simulate_reference, "Simulate the reference with the default config");
  c_test->add_option("--data", tst.data, "Matched-pairs CSV (joint test)");
  c_test->add_option("--replicates", tst.replicates, "Null replicates for the joint rectangle")->capture_default_str();
  c_test->add_option("--concentration", tst.concentration, "total or mean resultant in the distal_vm law")
      ->capture_default_str();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Write a synthetic matched-pairs CSV");
  c_sim->add_option("--config", sim.config, "Simulation config JSON");
  c_sim->add_option("--preset", sim.preset)->check(CLI::IsMember({"null", "standin"}))->capture_default_str();
  c_sim->add_option("--tau", sim.tau, "Injected anisotropic rate (mean if --tau-sd > 0)")->capture_default_str();
  c_sim->add_option("--gamma", sim.gamma, "Growth axis")->capture_default_str();
  c_sim->add_option("--lambda", sim.lambda, "Isotropic rate (mean if --lambda-sd > 0)")->capture_default_str();
  c_sim->add_option("--tau-sd", sim.tau_sd)->capture_default_str();
  c_sim->add_option("--lambda-sd", sim.lambda_sd)->capture_default_str();

  SweepArgs swp;
  auto* c_sweep = app.add_subcommand("sweep", "Smallest detected tau per growth axis");
  c_sweep->add_option("--test", swp.test)
      ->check(CLI::IsMember({"rayleigh", "tau_ks", "distal_vm", "distal_boot"}))
      ->capture_default_str();
  c_sweep->add_option("--data", swp.data, "Matched-pairs CSV (default: simulated preset)");
  c_sweep->add_option("--preset", swp.preset)->check(CLI::IsMember({"null", "standin"}))->capture_default_str();
  c_sweep->add_option("--gamma-count", swp.gamma_count, "Axes k pi / count")->capture_default_str();
  c_sweep->add_option("--tau-first", swp.tau_first)->capture_default_str();
  c_sweep->add_option("--tau-last", swp.tau_last)->capture_default_str();
  c_sweep->add_option("--tau-step", swp.tau_step)->capture_default_str();
  c_sweep->add_option("--alpha", swp.alpha)->capture_default_str();
  c_sweep->add_option("--epsilon", swp.epsilon)->capture_default_str();
  c_sweep->add_option("--reference-config", swp.reference_config, "Simulation config JSON for the KS reference");

  std::string align_input;
  auto* c_align = app.add_subcommand("align-precision", "Alignment precision eta from rotation estimates");
  c_align->add_option("estimates", align_input, "Estimates CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_est) return run_estimate(g, est);
    if (*c_test) return run_test(g, tst);
    if (*c_sim) return run_simulate(g, sim);
    if (*c_sweep) return run_sweep(g, swp);
    if (*c_align) return run_align_precision(g, align_input);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ag::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ag::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const ag::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const ag::DegenerateConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ag::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
