// lanewave: two-scale traffic-flow simulation front end.
//
// Commands
//   run-macro-2d   finite-volume run of the 2D model, field snapshots as CSV
//   run-macro-1d   finite-volume run of the 1D model
//   run-micro      particle-model run (2D four-lane fleet or 1D column)
//   compare        micro-vs-macro discrepancy report, or trajectory errors
//                  against a reference file (--reference)
//   riemann        wave structure and intermediate states for a state pair
//   eigen          eigenvalues, eigenvectors and invariants of a state
//
// Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lanewave/config.hpp"
#include "lanewave/core.hpp"
#include "lanewave/fvm.hpp"
#include "lanewave/io.hpp"
#include "lanewave/micro.hpp"
#include "lanewave/riemann.hpp"
#include "lanewave/scenarios.hpp"

namespace {

using namespace lanewave;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string reference_path;
  std::vector<std::string> sets;
};

config::RunConfig load_config(const CliOptions& opt) {
  config::RunConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot open config '" + opt.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = config::parse_config(ss.str());
  }
  for (const std::string& s : opt.sets) config::apply_cli_set(cfg, s);
  config::validate(cfg);
  return cfg;
}

std::string snapshot_name(const std::string& stem, double t, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_t%.6f.%s", stem.c_str(), t, ext.c_str());
  return buf;
}

std::filesystem::path out_file(const CliOptions& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return std::filesystem::path(opt.out_dir) / name;
}

int run_macro_2d(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& spec = cfg.spec;
  const fvm::Field2D f0 = scenarios::initial_field(spec);
  fvm::RunStats stats;
  const auto snaps = fvm::run(f0, spec.t_final, spec.cfl, spec.snapshot_times,
                              spec.params, &stats);
  for (const auto& s : snaps) {
    if (cfg.write_csv)
      io::write_field_csv(s.field, spec.params,
                          out_file(opt, snapshot_name("field", s.t, "csv")).string());
    if (cfg.write_pgm)
      io::write_field_pgm(s.field, spec.params,
                          out_file(opt, snapshot_name("field", s.t, "pgm")).string());
  }
  const fvm::Totals tot = fvm::totals(snaps.back().field);
  io::write_report(
      {
          {"scenario", cfg.scenario},
          {"t_final", io::fmt17(spec.t_final)},
          {"steps", std::to_string(stats.steps)},
          {"floor_events", std::to_string(stats.events.floor_events)},
          {"u_clamp_events", std::to_string(stats.events.u_clamps)},
          {"mass", io::fmt17(tot.mass)},
          {"momentum_w", io::fmt17(tot.momentum_w)},
          {"momentum_sigma", io::fmt17(tot.momentum_s)},
      },
      out_file(opt, "run_report.txt").string());
  return 0;
}

int run_macro_1d(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& spec = cfg.spec;
  const fvm::Field1D f0 = scenarios::initial_field_1d(spec);
  fvm::RunStats stats;
  const auto snaps = fvm::run_1d(f0, spec.t_final, spec.cfl, spec.snapshot_times,
                                 spec.params, &stats);
  for (const auto& s : snaps)
    io::write_field1d_csv(s.field, spec.params,
                          out_file(opt, snapshot_name("field1d", s.t, "csv")).string());
  io::write_report(
      {
          {"scenario", cfg.scenario},
          {"steps", std::to_string(stats.steps)},
          {"floor_events", std::to_string(stats.events.floor_events)},
          {"u_clamp_events", std::to_string(stats.events.u_clamps)},
      },
      out_file(opt, "run_report.txt").string());
  return 0;
}

int run_micro(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& spec = cfg.spec;
  std::vector<io::FleetCsvRow> rows;
  micro::MicroStepStats stats;
  if (cfg.scenario == "arz1d-vs-ftl1d") {
    micro::Fleet1D fleet = scenarios::place_fleet_1d(spec);
    double t = 0.0;
    auto emit = [&](double at) {
      for (std::size_t i = 0; i < fleet.x.size(); ++i) {
        const double rho = (i + 1 < fleet.x.size()) ? micro::local_density_1d(i, fleet) : 0.0;
        rows.push_back({at, static_cast<int>(i), 0, fleet.x[i], 0.0, fleet.u[i], 0.0, rho});
      }
    };
    emit(0.0);
    const long n = std::lround(std::ceil(spec.t_final / spec.micro_dt - 1e-12));
    const double h = spec.t_final / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      fleet = micro::ftl1d_step(fleet, h, spec.params);
      t += h;
    }
    emit(spec.t_final);
    (void)t;
  } else {
    micro::Fleet fleet = scenarios::place_fleet_four_lanes(spec);
    const auto mp = micro::MicroParams::make(spec.params, spec.dx_car, spec.dy_car);
    for (const auto& r : io::fleet_rows(fleet, 0.0)) rows.push_back(r);
    fleet = scenarios::advance_fleet(fleet, spec.t_final, spec.micro_dt, mp, &stats);
    for (const auto& r : io::fleet_rows(fleet, spec.t_final)) rows.push_back(r);
  }
  io::write_fleet_csv(rows, out_file(opt, "fleet.csv").string());
  io::write_report(
      {
          {"scenario", cfg.scenario},
          {"t_final", io::fmt17(spec.t_final)},
          {"micro_dt", io::fmt17(spec.micro_dt)},
          {"u_clamps", std::to_string(stats.u_clamps)},
          {"wall_contacts", std::to_string(stats.wall_contacts)},
          {"no_partner_steps", std::to_string(stats.no_partner)},
      },
      out_file(opt, "run_report.txt").string());
  return 0;
}

int run_compare(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& spec = cfg.spec;

  if (!opt.reference_path.empty()) {
    const auto ref = io::read_trajectory_csv(opt.reference_path);
    const auto sim = scenarios::simulate_with_reference_leader(
        ref, spec.params, spec.dx_car, spec.dy_car, spec.road_width(), spec.micro_dt);
    const auto errs = scenarios::compare_trajectories(sim, ref);
    std::ofstream out(out_file(opt, "trajectory_errors.csv"));
    if (!out) throw IoError("cannot open trajectory_errors.csv for writing");
    out << "t,id,error\n";
    for (const auto& e : errs)
      out << io::fmt17(e.t) << ',' << e.id << ',' << io::fmt17(e.error) << '\n';
    return 0;
  }

  if (cfg.scenario == "arz1d-vs-ftl1d") {
    const auto t0 = std::chrono::steady_clock::now();
    micro::Fleet1D fleet = scenarios::place_fleet_1d(spec);
    const long n = std::lround(std::ceil(spec.t_final / spec.micro_dt - 1e-12));
    const double h = spec.t_final / static_cast<double>(n);
    for (long k = 0; k < n; ++k) fleet = micro::ftl1d_step(fleet, h, spec.params);
    fvm::RunStats stats;
    const auto snaps =
        fvm::run_1d(scenarios::initial_field_1d(spec), spec.t_final, spec.cfl, {},
                    spec.params, &stats);
    const double l1 = scenarios::compare_ftl1d_arz1d(fleet, snaps.back().field);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
    io::write_report(
        {
            {"scenario", cfg.scenario},
            {"l1_density", io::fmt17(l1)},
            {"floor_events", std::to_string(stats.events.floor_events)},
            {"u_clamp_events", std::to_string(stats.events.u_clamps)},
            {"runtime_seconds", io::fmt17(elapsed.count())},
        },
        out_file(opt, "compare_report.txt").string());
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  fvm::RunStats mstats;
  const auto snaps = fvm::run(scenarios::initial_field(spec), spec.t_final, spec.cfl,
                              {}, spec.params, &mstats);
  micro::Fleet fleet = scenarios::place_fleet_four_lanes(spec);
  const auto mp = micro::MicroParams::make(spec.params, spec.dx_car, spec.dy_car);
  micro::MicroStepStats ustats;
  fleet = scenarios::advance_fleet(fleet, spec.t_final, spec.micro_dt, mp, &ustats);
  scenarios::ComparisonReport r =
      scenarios::compare_micro_macro(fleet, snaps.back().field, spec.params);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
  r.floor_events = mstats.events.floor_events;
  r.u_clamp_events = mstats.events.u_clamps + ustats.u_clamps;
  r.runtime_seconds = elapsed.count();
  io::write_report(
      {
          {"scenario", cfg.scenario},
          {"l1_density", io::fmt17(r.l1_density)},
          {"linf_density", io::fmt17(r.linf_density)},
          {"l1_flux_x", io::fmt17(r.l1_flux_x)},
          {"l1_flux_y", io::fmt17(r.l1_flux_y)},
          {"vehicles_compared", std::to_string(r.vehicles_compared)},
          {"vehicles_excluded", std::to_string(r.vehicles_excluded)},
          {"floor_events", std::to_string(r.floor_events)},
          {"u_clamp_events", std::to_string(r.u_clamp_events)},
          {"runtime_seconds", io::fmt17(r.runtime_seconds)},
      },
      out_file(opt, "compare_report.txt").string());
  return 0;
}

const char* kind_name(riemann::WaveKind k) {
  switch (k) {
    case riemann::WaveKind::identity: return "identity (degenerate contact)";
    case riemann::WaveKind::shock1: return "1-shock";
    case riemann::WaveKind::rarefaction1: return "1-rarefaction";
    case riemann::WaveKind::contact2: return "2-contact";
    case riemann::WaveKind::contact3: return "3-contact";
    case riemann::WaveKind::not_elementary: return "not elementary";
  }
  return "?";
}

void print_state(const char* label, const PrimitiveState& s) {
  std::cout << label << " = (rho " << io::fmt17(s.rho) << ", u " << io::fmt17(s.u)
            << ", v " << io::fmt17(s.v) << ")\n";
}

int run_riemann(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& p = cfg.spec.params;
  const Direction xi = Direction::of(cfg.xi_x, cfg.xi_y);

  print_state("left ", cfg.left);
  print_state("right", cfg.right);
  const auto cls = riemann::classify(cfg.left, cfg.right, p);
  std::cout << "classification: " << kind_name(cls.kind) << "\n";
  std::cout << "invariant jumps: z1 " << io::fmt17(cls.invariant_jumps[0]) << ", z2 "
            << io::fmt17(cls.invariant_jumps[1]) << ", z3 "
            << io::fmt17(cls.invariant_jumps[2]) << "\n";
  if (cls.kind == riemann::WaveKind::identity) return 0;

  if (cls.kind == riemann::WaveKind::shock1) {
    const auto lax = riemann::lax_admissibility(cfg.left, cfg.right, xi, p);
    std::cout << "shock speed = " << io::fmt17(lax.shock) << "\n";
    std::cout << "lax check: lambda1(l) " << io::fmt17(lax.lambda_left) << " >= s >= "
              << io::fmt17(lax.lambda_right) << " lambda1(r): "
              << (lax.admissible ? "admissible" : "violated") << "\n";
  } else if (cls.kind == riemann::WaveKind::rarefaction1) {
    const auto fan = riemann::rarefaction_fan(cfg.left, cfg.right, xi, 9, p);
    std::cout << "fan speeds = [" << io::fmt17(fan.front().xi) << ", "
              << io::fmt17(fan.back().xi) << "]\n";
  }

  const double sl = riemann::sigma_of(cfg.left, p);
  const double sr = riemann::sigma_of(cfg.right, p);
  if (std::abs(sl) <= riemann::kInvariantTol && std::abs(sr) <= riemann::kInvariantTol) {
    const auto c1 = riemann::solve_case1(cfg.left, cfg.right, p);
    print_state("intermediate", c1.star);
    if (c1.clamped) std::cout << "note: intermediate density clamped to range\n";
  } else if (std::abs(sl - sr) <= riemann::kInvariantTol && sl > riemann::kInvariantTol &&
             cfg.left.v >= -riemann::kInvariantTol) {
    const auto c2 = riemann::solve_case2(cfg.left, cfg.right, p);
    std::cout << (c2.lane_change ? "lane changing possible\n" : "no lane changing\n");
    print_state("left intermediate ", c2.left_star);
    print_state("right intermediate", c2.right_star);
    std::cout << "residuals =";
    for (double r : c2.residuals) std::cout << ' ' << io::fmt17(r);
    std::cout << "\n";
  }
  return 0;
}

int run_eigen(const CliOptions& opt) {
  const config::RunConfig cfg = load_config(opt);
  const auto& p = cfg.spec.params;
  const Direction xi = Direction::of(cfg.xi_x, cfg.xi_y);
  print_state("state", cfg.left);
  std::cout << "xi = (" << io::fmt17(xi.xi1) << ", " << io::fmt17(xi.xi2) << ")\n";
  const auto l = eigenvalues(cfg.left, xi, p);
  std::cout << "lambda = (" << io::fmt17(l[0]) << ", " << io::fmt17(l[1]) << ", "
            << io::fmt17(l[2]) << ")\n";
  const auto z = riemann_invariants(cfg.left, p);
  std::cout << "invariants z = (" << io::fmt17(z[0]) << ", " << io::fmt17(z[1]) << ", "
            << io::fmt17(z[2]) << ")\n";
  const auto e = eigenvectors_numeric(cfg.left, xi, p);
  if (e.degenerate) {
    std::cout << "eigenvectors: degenerate spectrum, not computed\n";
  } else {
    for (int k = 0; k < 3; ++k)
      std::cout << "r" << (k + 1) << " = (" << io::fmt17(e.vectors[k][0]) << ", "
                << io::fmt17(e.vectors[k][1]) << ", " << io::fmt17(e.vectors[k][2])
                << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lanewave: two-scale multi-lane traffic flow simulator"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* cmd_m2 = app.add_subcommand("run-macro-2d", "finite-volume run of the 2D model");
  auto* cmd_m1 = app.add_subcommand("run-macro-1d", "finite-volume run of the 1D model");
  auto* cmd_mi = app.add_subcommand("run-micro", "particle-model run");
  auto* cmd_cp = app.add_subcommand("compare", "micro-vs-macro or trajectory comparison");
  cmd_cp->add_option("--reference", opt.reference_path,
                     "reference trajectory CSV (t,id,x,y,u,v)");
  auto* cmd_ri = app.add_subcommand("riemann", "classify a left/right state pair");
  auto* cmd_ei = app.add_subcommand("eigen", "eigenstructure of a state");

  for (CLI::App* sub : {cmd_m2, cmd_m1, cmd_mi, cmd_cp, cmd_ri, cmd_ei}) {
    sub->add_option("--config", opt.config_path, "path to a key = value config file");
    sub->add_option("--out", opt.out_dir, "output directory (default: out)");
    sub->add_option("--set", opt.sets, "override, key=value (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_m2->parsed()) return run_macro_2d(opt);
    if (cmd_m1->parsed()) return run_macro_1d(opt);
    if (cmd_mi->parsed()) return run_micro(opt);
    if (cmd_cp->parsed()) return run_compare(opt);
    if (cmd_ri->parsed()) return run_riemann(opt);
    if (cmd_ei->parsed()) return run_eigen(opt);
  } catch (const lanewave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lanewave::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
