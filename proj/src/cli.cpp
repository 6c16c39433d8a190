// Copyright 2026 The nonlocalsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nonlocalsim/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nonlocalsim/analysis.hpp"
#include "nonlocalsim/excitation_engine.hpp"
#include "nonlocalsim/parallel.hpp"
#include "nonlocalsim/protocols.hpp"
#include "nonlocalsim/random.hpp"

namespace nonlocalsim::cli {
namespace {

using linalg::Index;
using linalg::Matrix;
using linalg::Vector;
using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out_path;
  Index max_amplitudes = 0;
  bool integral_qubits = false;
  int jobs = 1;

  model::QubitAccounting accounting() const {
    return integral_qubits ? model::QubitAccounting::kIntegral : model::QubitAccounting::kExact;
  }
};

struct SimulateArgs {
  Index d = 1;
  Index m = 8;
  std::string input = "00";
  std::string mode = "approx";
  std::string engine = "register";
  std::string format = "json";
  bool timing = false;
};

struct SweepArgs {
  Index d = 1;
  std::vector<Index> m_list;
  int trials = 20;
  std::string strategy = "random";
  std::string channel = "simulation";
  std::string format = "csv";
};

struct BoundsArgs {
  bool appendix = false;
  bool delta_eps = false;
  bool chain = false;
  bool fannes_alicki = false;
  bool continuity = false;
  Index d = 16;
  double epsilon = std::ldexp(1.0, -18);
  double n = 1024.0;
  double c = 3.0;
  Index m = 16;
  int trials = 5;
};

struct CostArgs {
  double epsilon = 0.1;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Seed for random inputs");
  cmd->add_option("--out", common.out_path, "Write output to this file instead of stdout");
  cmd->add_option("--max-amplitudes", common.max_amplitudes,
                  "Amplitude cap (default 2^24 or NONLOCALSIM_MAX_AMPLITUDES)")
      ->check(CLI::Range(Index{1} << 10, std::numeric_limits<Index>::max()));
  cmd->add_flag("--integral-qubits", common.integral_qubits,
                "Charge ceil(log2 dim) qubits per sent register");
}

const char* to_string(model::QubitAccounting a) {
  return a == model::QubitAccounting::kExact ? "exact" : "integral";
}

json ledger_json(const model::CommLedger& ledger) {
  json events = json::array();
  for (const auto& e : ledger.events()) {
    events.push_back({{"step", e.step},
                      {"register", e.register_label},
                      {"from", model::to_string(e.sender)},
                      {"to", model::to_string(e.receiver)},
                      {"qubits", e.qubits}});
  }
  return {{"accounting", to_string(ledger.accounting())},
          {"forward_qubits", ledger.forward_qubits()},
          {"backward_qubits", ledger.backward_qubits()},
          {"total_qubits", ledger.total_qubits()},
          {"classical_bits", ledger.classical_bits()},
          {"events", events}};
}

// Parses "00", "phi", "random" or a two-digit basis label "ab".
Vector parse_input(const std::string& spec, Index d, std::uint64_t seed, linalg::Dims& reference_dims) {
  const Index local = d + 1;
  reference_dims.clear();
  if (spec == "00") return model::basis_vector(local * local, 0);
  if (spec == "phi") return model::phi_vector(d);
  if (spec == "random") {
    auto rng = random::trial_rng(seed, 0);
    reference_dims = {local * local};
    return random::random_pure_state(local * local * local * local, rng);
  }
  if (spec.size() == 2 && std::isdigit(static_cast<unsigned char>(spec[0])) &&
      std::isdigit(static_cast<unsigned char>(spec[1]))) {
    const Index a = spec[0] - '0';
    const Index b = spec[1] - '0';
    if (a <= d && b <= d) return model::basis_vector(local * local, a * local + b);
  }
  throw UsageError("--input must be 00, phi, random or a basis label ab with digits in [0, d]");
}

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << v;
  return os.str();
}

json cmd_simulate(const SimulateArgs& args, const Common& common, bool& ok) {
  if (args.d < 1) throw UsageError("--d must be >= 1");
  if (args.m < 2) throw UsageError("--m must be >= 2");
  const auto start = std::chrono::steady_clock::now();
  linalg::Dims ref_dims;
  const Vector amplitudes = parse_input(args.input, args.d, common.seed, ref_dims);
  const auto target = protocols::phi_minus_target(args.d);
  const model::PureState input = protocols::make_input(amplitudes, ref_dims, target);

  protocols::RunOptions options;
  options.max_amplitudes = common.max_amplitudes;
  options.accounting = common.accounting();
  options.engine = args.engine == "excitation" ? protocols::Engine::kExcitation
                                               : protocols::Engine::kRegister;
  const auto mode = args.mode == "ideal" ? protocols::Mode::kIdeal : protocols::Mode::kApprox;
  const auto result = protocols::run_w(input, args.d, args.m, mode, options);

  const Index ref_dim = linalg::product(ref_dims);
  const Matrix exact_gate = linalg::tensor_product(Matrix(Matrix::Identity(ref_dim, ref_dim)),
                                                   model::gate_u_matrix(args.d));
  const Vector exact = exact_gate * amplitudes;
  const auto& rho = *result.final_density;
  const double distance =
      linalg::trace_distance(rho, linalg::Density{exact * exact.adjoint(), rho.dims});
  const double bound = analysis::simulation_distance_bound(args.m);
  ok = distance <= bound + analysis::kBoundSlack;

  json record{{"command", "simulate"},
              {"d", args.d},
              {"m", args.m},
              {"input", args.input},
              {"seed", common.seed},
              {"mode", args.mode},
              {"engine", args.engine},
              {"measured_distance", distance},
              {"bound", bound},
              {"satisfied", ok},
              {"ledger", ledger_json(result.ledger)}};
  if (args.timing) {
    record["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return record;
}

std::string cmd_sweep(const SweepArgs& args, const Common& common, bool& ok) {
  if (args.m_list.empty()) throw UsageError("--m needs at least one value");
  if (args.d < 1) throw UsageError("--d must be >= 1");
  if (args.trials < 1) throw UsageError("--trials must be >= 1");
  for (Index m : args.m_list) {
    if (m < 2) throw UsageError("every m must be >= 2");
  }
  const bool simulation = args.channel == "simulation";
  const Vector alpha = model::phi_minus_vector(args.d);
  const linalg::Dims local{args.d + 1, args.d + 1};

  json rows = json::array();
  ok = true;
  for (Index m : args.m_list) {
    analysis::Channel a, b;
    double bound = 0.0;
    if (simulation) {
      a = analysis::w_channel(args.d, m, common.max_amplitudes);
      b = analysis::exact_u_channel(args.d);
      bound = analysis::simulation_distance_bound(m);
    } else {
      a = analysis::approx_measurement_channel(alpha, local, m, common.max_amplitudes);
      b = analysis::ideal_measurement_channel(alpha, local, m, common.max_amplitudes);
      bound = analysis::measurement_distance_bound(m);
    }
    analysis::SearchOptions opts;
    opts.strategy = args.strategy == "ansatz" ? analysis::SearchStrategy::kAnsatz
                                              : analysis::SearchStrategy::kRandom;
    opts.trials = args.trials;
    opts.seed = common.seed;
    opts.target = alpha;
    opts.jobs = common.jobs;
    const auto report = analysis::channel_distance_search(a, b, bound, opts);

    // Communication of one run on |00>.
    model::CommLedger ledger(common.accounting());
    const Vector zero = model::basis_vector(alpha.size(), 0);
    const protocols::ExcitationEngine engine(alpha, m, 1, common.max_amplitudes);
    Vector state = engine.approx_measurement(zero, &ledger);
    if (simulation) {
      engine.phase(state, -1.0);
      engine.measure(state, &ledger, nullptr);
    }
    ok = ok && report.satisfied;
    rows.push_back({{"d", args.d},
                    {"m", m},
                    {"trials", args.trials},
                    {"max_measured_distance", report.measured},
                    {"bound", bound},
                    {"satisfied", report.satisfied},
                    {"fwd_qubits", ledger.forward_qubits()},
                    {"bwd_qubits", ledger.backward_qubits()},
                    {"bits_equiv", ledger.classical_bits()}});
  }

  if (args.format == "json") return rows.dump(2) + "\n";
  std::ostringstream os;
  os << "d,m,trials,max_measured_distance,bound,satisfied,fwd_qubits,bwd_qubits,bits_equiv\n";
  for (const auto& r : rows) {
    os << r["d"].get<Index>() << ',' << r["m"].get<Index>() << ',' << r["trials"].get<int>() << ','
       << format_number(r["max_measured_distance"]) << ',' << format_number(r["bound"]) << ','
       << (r["satisfied"].get<bool>() ? "true" : "false") << ',' << format_number(r["fwd_qubits"])
       << ',' << format_number(r["bwd_qubits"]) << ',' << format_number(r["bits_equiv"]) << '\n';
  }
  return os.str();
}

std::vector<analysis::BoundReport> appendix_suite(const BoundsArgs& args, const Common& common) {
  std::vector<analysis::BoundReport> reports;
  std::uint64_t index = 0;
  for (Index d : {1, 2}) {
    for (Index m : {2, 4, 8}) {
      for (int t = 0; t < args.trials; ++t) {
        auto rng = random::trial_rng(common.seed, index++);
        const auto g = analysis::random_general_input(model::phi_minus_vector(d), 2, rng);
        for (auto& r : analysis::verify_appendix_bounds(g, m, common.max_amplitudes)) {
          r.context["d"] = d;
          reports.push_back(std::move(r));
        }
      }
    }
  }
  return reports;
}

analysis::BoundReport delta_eps_report(const BoundsArgs& args) {
  const auto lb = analysis::epr_lower_bound(args.d, args.epsilon);
  const double n = std::log2(static_cast<double>(args.d + 1));
  json ctx{{"check", "epr_lower_bound"},
           {"d", args.d},
           {"epsilon", args.epsilon},
           {"delta", lb.delta},
           {"vacuous", lb.vacuous()}};
  // Simulating a gate that creates Delta ebits costs at least Delta; the
  // trivial protocol spends 4 n with n = log2(d + 1) qubits per side.
  return analysis::make_report(std::move(ctx), lb.bits.value_or(0.0), analysis::trivial_teleport_cost(n));
}

analysis::BoundReport chain_report(const BoundsArgs& args) {
  const auto ch = analysis::capacity_bound_chain(args.n, args.c);
  json ctx{{"check", "capacity_chain"},
           {"n", args.n},
           {"c", args.c},
           {"m", ch.m},
           {"eta", ch.eta},
           {"term1", ch.term1},
           {"term2", ch.term2},
           {"term3", ch.term3},
           {"total", ch.total},
           {"chain_log_m", ch.chain_log_m},
           {"chain_eta_n", ch.chain_eta_n},
           {"chain_entropy", ch.chain_entropy},
           {"dominated", ch.dominated}};
  auto report = analysis::make_report(std::move(ctx), ch.chain_total, ch.total);
  report.satisfied = report.satisfied && ch.dominated;
  return report;
}

std::vector<analysis::BoundReport> fannes_alicki_suite(const BoundsArgs& args, const Common& common) {
  std::vector<analysis::BoundReport> reports;
  std::uint64_t index = 0;
  for (Index dim_z : {2, 4, 8}) {
    const linalg::Dims dims{2, dim_z};
    for (int t = 0; t < args.trials; ++t) {
      auto rng = random::trial_rng(common.seed, index++);
      const Index dim = 2 * dim_z;
      const linalg::Density sigma{random::random_density_matrix(dim, dim, rng), dims};
      const linalg::Density sigma_prime{random::random_density_matrix(dim, dim, rng), dims};
      reports.push_back(analysis::fannes_alicki_check(sigma, sigma_prime));
    }
  }
  return reports;
}

std::vector<analysis::BoundReport> continuity_suite(const BoundsArgs& args, const Common& common) {
  const Index d = 1;
  const auto exact = analysis::exact_u_channel(d);
  const auto simulated = analysis::w_channel(d, args.m, common.max_amplitudes);
  const double eps = analysis::simulation_distance_bound(args.m);
  const auto reports = parallel_trials(args.trials, common.jobs, [&](int t) {
    auto rng = random::trial_rng(common.seed, static_cast<std::uint64_t>(t));
    const auto ensemble = analysis::random_ensemble(3, {2, 2}, {d + 1, d + 1}, rng);
    auto report = analysis::continuity_gap_check(exact, simulated, eps, ensemble, d);
    report.context["m"] = args.m;
    return report;
  });
  return reports;
}

json cmd_bounds(const BoundsArgs& args, const Common& common, bool& ok, std::ostream& err) {
  if (args.trials < 1) throw UsageError("--trials must be >= 1");
  const bool all =
      !(args.appendix || args.delta_eps || args.chain || args.fannes_alicki || args.continuity);
  std::vector<analysis::BoundReport> reports;
  auto append = [&](std::vector<analysis::BoundReport> more) {
    for (auto& r : more) reports.push_back(std::move(r));
  };
  if (all || args.appendix) append(appendix_suite(args, common));
  if (all || args.delta_eps) reports.push_back(delta_eps_report(args));
  if (all || args.chain) reports.push_back(chain_report(args));
  if (all || args.fannes_alicki) append(fannes_alicki_suite(args, common));
  if (all || args.continuity) append(continuity_suite(args, common));

  ok = true;
  json out = json::array();
  for (const auto& r : reports) {
    if (!r.satisfied) {
      ok = false;
      err << "violated: " << r.context.dump() << " measured=" << format_number(r.measured)
          << " bound=" << format_number(r.bound) << '\n';
    }
    out.push_back(r);
  }
  return out;
}

json cmd_cost(const CostArgs& args, const Common& common) {
  if (!(args.epsilon > 0.0 && args.epsilon <= 1.0)) throw UsageError("--epsilon must lie in (0, 1]");
  const auto cost = analysis::simulation_cost(args.epsilon, common.accounting());
  return {{"command", "cost"},
          {"epsilon", args.epsilon},
          {"accounting", to_string(common.accounting())},
          {"m", cost.m},
          {"m_integral", cost.m_integral},
          {"qubits_each_direction", cost.qubits_each_direction},
          {"classical_bits", cost.classical_bits},
          {"closed_form_bits", cost.closed_form_bits}};
}

int emit(const std::string& text, const Common& common, std::ostream& out, std::ostream& err) {
  if (common.out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream file(common.out_path, std::ios::binary);
  if (!file || !(file << text)) {
    err << "error: cannot write " << common.out_path << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal gate simulation: protocols, sweeps and bound suites", "nonlocalsim"};
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  SweepArgs sweep;
  BoundsArgs bounds;
  CostArgs cost;

  auto* simulate_cmd = app.add_subcommand("simulate", "Run the simulation of U on one input");
  add_common(simulate_cmd, common);
  simulate_cmd->add_option("--d", sim.d, "Local levels are d + 1");
  simulate_cmd->add_option("--m", sim.m, "Catalyst copies");
  simulate_cmd->add_option("--input", sim.input, "00, phi, random, or a basis label such as 01");
  simulate_cmd->add_option("--mode", sim.mode)->check(CLI::IsMember({"approx", "ideal"}));
  simulate_cmd->add_option("--engine", sim.engine)->check(CLI::IsMember({"register", "excitation"}));
  simulate_cmd->add_option("--format", sim.format)->check(CLI::IsMember({"json"}));
  simulate_cmd->add_flag("--timing", sim.timing, "Include the wall-clock runtime");

  auto* sweep_cmd = app.add_subcommand("sweep", "Distance estimates and costs over a list of m");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--d", sweep.d);
  sweep_cmd->add_option("--m", sweep.m_list, "List of m values")->delimiter(',');
  sweep_cmd->add_option("--trials", sweep.trials, "Random inputs (or ansatz restarts) per m");
  sweep_cmd->add_option("--strategy", sweep.strategy)->check(CLI::IsMember({"random", "ansatz"}));
  sweep_cmd->add_option("--channel", sweep.channel, "simulation: (W, U); measurement: (M_a, M_i)")
      ->check(CLI::IsMember({"simulation", "measurement"}));
  sweep_cmd->add_option("--format", sweep.format)->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--jobs", common.jobs)->check(CLI::PositiveNumber);

  auto* bounds_cmd = app.add_subcommand("bounds", "Verify bound suites (all when none is selected)");
  add_common(bounds_cmd, common);
  bounds_cmd->add_flag("--appendix", bounds.appendix, "Deviation bounds of the approximate test");
  bounds_cmd->add_flag("--delta-eps", bounds.delta_eps, "Entanglement lower bound on the cost");
  bounds_cmd->add_flag("--chain", bounds.chain, "Capacity bound chain");
  bounds_cmd->add_flag("--fannes-alicki", bounds.fannes_alicki, "Conditional entropy continuity");
  bounds_cmd->add_flag("--continuity", bounds.continuity, "Mutual information continuity for (U, W)");
  bounds_cmd->add_option("--d", bounds.d, "d for --delta-eps");
  bounds_cmd->add_option("--epsilon", bounds.epsilon, "epsilon for --delta-eps");
  bounds_cmd->add_option("--n", bounds.n, "n for --chain");
  bounds_cmd->add_option("--c", bounds.c, "c for --chain");
  bounds_cmd->add_option("--m", bounds.m, "m for --continuity");
  bounds_cmd->add_option("--trials", bounds.trials, "Random cases per suite");
  bounds_cmd->add_option("--jobs", common.jobs)->check(CLI::PositiveNumber);

  auto* cost_cmd = app.add_subcommand("cost", "Communication cost of the simulation at a target error");
  add_common(cost_cmd, common);
  cost_cmd->add_option("--epsilon", cost.epsilon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (common.max_amplitudes == 0) common.max_amplitudes = model::default_amplitude_cap();

  try {
    bool ok = true;
    std::string text;
    if (*simulate_cmd) {
      text = cmd_simulate(sim, common, ok).dump(2) + "\n";
    } else if (*sweep_cmd) {
      text = cmd_sweep(sweep, common, ok);
    } else if (*bounds_cmd) {
      text = cmd_bounds(bounds, common, ok, err).dump(2) + "\n";
    } else {
      text = cmd_cost(cost, common).dump(2) + "\n";
    }
    const int status = emit(text, common, out, err);
    if (status != kExitOk) return status;
    return ok ? kExitOk : kExitViolation;
  } catch (const model::BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"nonlocalsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nonlocalsim::cli
