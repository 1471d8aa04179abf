// isac-aoi: bound, optimize, sweep and simulate front end.
//
// Exit codes: 0 success, 2 config error, 3 infeasible or unstable,
// 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "isac_aoi/bound.hpp"
#include "isac_aoi/errors.hpp"
#include "isac_aoi/params.hpp"
#include "isac_aoi/sim.hpp"
#include "isac_aoi/sweep.hpp"

namespace {

using namespace isac_aoi;
using json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
  std::string out;
  long long packets = 100000;
  int replications = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits --set values into parameter and sweep.* overrides.
ParamSet load_layers(const CommonOptions& o, const std::string& text, sweep::SweepSpec* spec) {
  ParamSet ps;
  ps.merge_text(text);
  ps.merge_env();
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq != std::string::npos && s.starts_with("sweep.")) {
      if (!spec) throw ConfigError(fmt::format("'{}' only applies to the sweep command", s));
      sweep::set_field(*spec, s.substr(0, eq), s.substr(eq + 1));
    } else {
      ps.merge_assignment(s);
    }
  }
  return ps;
}

// Writes to --out, or to stdout when no file was given.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
  write(f);
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

json bound_json(const bound::BoundResult& b) {
  return json{{"pavp_bound", std::isfinite(b.pavp_bound) ? json(b.pavp_bound) : json("inf")},
              {"pavp_bound_clamped", b.reported()},
              {"theta_star", b.theta_star},
              {"alpha", b.alpha},
              {"stable", b.stable},
              {"divergence", to_string(b.divergence)},
              {"note", b.note},
              {"diagnostics",
               {{"arrival_mgf_pos", b.diagnostics.arrival_mgf_pos},
                {"arrival_mgf_neg", b.diagnostics.arrival_mgf_neg},
                {"service_mgf", b.diagnostics.service_mgf},
                {"stability_product", b.diagnostics.stability_product}}}};
}

void print_bound_table(const bound::BoundResult& b) {
  std::cout << fmt::format("{:<20}{}\n", "alpha", num(b.alpha));
  std::cout << fmt::format("{:<20}{}\n", "theta*", num(b.theta_star));
  std::cout << fmt::format("{:<20}{}\n", "pavp bound", num(b.reported()));
  std::cout << fmt::format("{:<20}{}\n", "pavp bound (raw)", num(b.pavp_bound));
  std::cout << fmt::format("{:<20}{}\n", "stable", b.stable ? "yes" : "no");
  std::cout << fmt::format("{:<20}{}\n", "M_A(theta)", num(b.diagnostics.arrival_mgf_pos));
  std::cout << fmt::format("{:<20}{}\n", "M_A(-theta)", num(b.diagnostics.arrival_mgf_neg));
  std::cout << fmt::format("{:<20}{}\n", "M_S(theta)", num(b.diagnostics.service_mgf));
  std::cout << fmt::format("{:<20}{}\n", "stability product", num(b.diagnostics.stability_product));
  if (b.divergence != bound::Divergence::none) {
    std::cout << fmt::format("{:<20}{}\n", "diagnostic", to_string(b.divergence));
  }
  if (!b.note.empty()) std::cout << fmt::format("{:<20}{}\n", "note", b.note);
}

int cmd_bound(const CommonOptions& o) {
  const auto text = o.config.empty() ? std::string{} : read_file(o.config);
  const auto p = load_layers(o, text, nullptr).build();
  const auto b = p.theta ? bound::pavp_bound(*p.theta, p) : bound::optimize_theta(p, p.alpha);
  print_bound_table(b);
  std::cout << bound_json(b).dump() << '\n';
  if (!o.out.empty()) {
    emit(o.out, [&](std::ostream& f) {
      f << "alpha,theta_star,pavp_bound,pavp_bound_clamped,stable,divergence\n";
      f << num(b.alpha) << ',' << num(b.theta_star) << ',' << num(b.pavp_bound) << ','
        << num(b.reported()) << ',' << (b.stable ? 1 : 0) << ',' << to_string(b.divergence)
        << '\n';
    });
  }
  return std::isfinite(b.pavp_bound) ? 0 : kExitInfeasible;
}

int cmd_optimize(const CommonOptions& o) {
  const auto text = o.config.empty() ? std::string{} : read_file(o.config);
  const auto p = load_layers(o, text, nullptr).build();
  const auto search = bound::optimize_alpha(p);
  const auto& b = search.best;
  std::cout << fmt::format("{:<20}{}\n", "alpha*", num(b.alpha));
  std::cout << fmt::format("{:<20}{}\n", "theta*", num(b.theta_star));
  std::cout << fmt::format("{:<20}{}\n", "pavp bound", num(b.reported()));
  std::cout << bound_json(b).dump() << '\n';
  emit(o.out, [&](std::ostream& f) {
    f << "alpha,pavp_bound,pavp_bound_clamped,theta_star,stable,divergence\n";
    for (const auto& g : search.grid) {
      f << num(g.alpha) << ',' << num(g.pavp_bound) << ',' << num(g.reported()) << ','
        << num(g.theta_star) << ',' << (g.stable ? 1 : 0) << ',' << to_string(g.divergence)
        << '\n';
    }
  });
  return 0;
}

int cmd_sweep(const CommonOptions& o, const CLI::App& app, bool timing) {
  if (o.config.empty()) throw ConfigError("sweep needs --config with sweep.* keys");
  const auto text = read_file(o.config);
  auto spec = sweep::parse_sweep_spec(text);
  const auto ps = load_layers(o, text, &spec);
  if (app.count("--seed")) spec.seed = o.seed;
  if (app.count("--packets")) spec.packets = o.packets;
  if (app.count("--replications")) spec.replications = o.replications;
  const auto rows = sweep::run_sweep(ps, spec);
  emit(o.out, [&](std::ostream& f) { sweep::write_csv(f, spec, rows, timing); });
  return 0;
}

int cmd_simulate(const CommonOptions& o, const std::string& trace_path, bool per_attempt) {
  const auto text = o.config.empty() ? std::string{} : read_file(o.config);
  const auto p = load_layers(o, text, nullptr).build();
  sim::SimOptions so;
  so.n_packets = o.packets;
  so.seed = o.seed;
  so.gain_mode = per_attempt ? service::GainMode::per_attempt : service::GainMode::per_packet;
  const auto st = sim::run_replications(p, so, o.replications);

  std::cout << fmt::format("{:<20}{}\n", "packets", st.n_packets);
  std::cout << fmt::format("{:<20}{}\n", "pavp", num(st.pavp_hat));
  std::cout << fmt::format("{:<20}[{}, {}]\n", "pavp 95% CI", num(st.pavp_ci.lo), num(st.pavp_ci.hi));
  std::cout << fmt::format("{:<20}{}\n", "sdp", num(st.sdp_hat));
  std::cout << fmt::format("{:<20}{}\n", "mean attempts", num(st.mean_attempts));
  std::cout << fmt::format("{:<20}{}\n", "mean deferrals", num(st.mean_deferrals));

  if (!trace_path.empty()) {
    so.keep_trace = true;
    const auto run = sim::run_sim(p, so);
    const auto check = sim::departure_recursion_check(run.trace);
    std::cout << fmt::format("{:<20}{} (max error {:.3g} s)\n", "recursion check",
                             check.pass ? "pass" : "FAIL", check.max_departure_error);
    std::ofstream f(trace_path);
    if (!f) throw ConfigError(fmt::format("cannot write '{}'", trace_path));
    sim::write_trace_csv(f, run.trace);
  }
  if (!o.out.empty()) {
    emit(o.out, [&](std::ostream& f) {
      f << "packets,replications,seed,pavp_sim,ci_lo,ci_hi,std_error,samples,sdp_sim,mean_attempts,mean_deferrals\n";
      f << st.n_packets << ',' << o.replications << ',' << o.seed << ',' << num(st.pavp_hat) << ','
        << num(st.pavp_ci.lo) << ',' << num(st.pavp_ci.hi) << ',' << num(st.pavp_std_error) << ','
        << st.paoi_samples.size() << ',' << num(st.sdp_hat) << ',' << num(st.mean_attempts) << ','
        << num(st.mean_deferrals) << '\n';
    });
  }
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Config file (key = value)");
  cmd->add_option("--set", o.sets, "Override, key=value (repeatable)");
  cmd->add_option("--out", o.out, "Output CSV file");
}

void add_sim_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--packets", o.packets, "Packets per replication")->check(CLI::PositiveNumber);
  cmd->add_option("--replications", o.replications, "Independent replications")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAoI violation bounds and simulation for an ISAC V2I link"};
  app.require_subcommand(1);
  CommonOptions o;
  std::string trace_path;
  bool per_attempt = false;
  bool timing = false;

  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the PAVP bound at the configured alpha");
  add_common(bound_cmd, o);
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize the power split alpha");
  add_common(opt_cmd, o);
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a recipe sweep and emit CSV");
  add_common(sweep_cmd, o);
  add_sim_options(sweep_cmd, o);
  sweep_cmd->add_flag("--timing", timing, "Append a runtime column (not byte-stable)");
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the queue and estimate the PAVP");
  add_common(sim_cmd, o);
  add_sim_options(sim_cmd, o);
  sim_cmd->add_option("--trace", trace_path, "Write a per-packet trace CSV");
  sim_cmd->add_flag("--per-attempt-gain", per_attempt, "Redraw the channel gain on every attempt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*bound_cmd) return cmd_bound(o);
    if (*opt_cmd) return cmd_optimize(o);
    if (*sweep_cmd) return cmd_sweep(o, *sweep_cmd, timing);
    if (*sim_cmd) return cmd_simulate(o, trace_path, per_attempt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TauTooLow& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoFeasibleAlpha& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const AllPowerToComm& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const AllPowerToSensing& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const MgfDiverges& e) {
    std::cerr << "unstable: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const NonProgress& e) {
    std::cerr << "unstable: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
