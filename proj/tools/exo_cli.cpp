#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "exo/checks.hpp"
#include "exo/config.hpp"
#include "exo/friction.hpp"
#include "exo/metrics.hpp"
#include "exo/sim.hpp"

using namespace exo;

namespace {

void print_log_summary(const SimLog& log, const std::string& path) {
  std::size_t qp = 0, optimal = 0, fallback = 0;
  long iters = 0;
  double max_rate = 0.0;
  for (const SimSample& s : log.samples) {
    max_rate = std::max(max_rate, s.qdot.tail<4>().cwiseAbs().maxCoeff());
    if (s.qp_status < 0) continue;
    ++qp;
    optimal += s.qp_status == static_cast<int>(QpStatus::Optimal);
    fallback += s.fallback;
    iters += s.qp_iterations;
  }
  std::printf("wrote %s: %zu samples, controller %s, desired %s, seed %llu\n", path.c_str(), log.samples.size(),
              to_string(log.controller), to_string(log.desired), static_cast<unsigned long long>(log.seed));
  std::printf("max |joint rate| %.4f rad/s\n", max_rate);
  if (qp > 0)
    std::printf("QP samples %zu, optimal %.4f, fallback %zu, mean iterations %.1f\n", qp,
                double(optimal) / double(qp), fallback, double(iters) / double(qp));
}

void print_friction(const FrictionFit& fit) {
  static const char* names[4] = {"left hip", "left knee", "right hip", "right knee"};
  std::printf("%-11s %12s %14s %8s\n", "joint", "c0 [N*m]", "c1 [N*m*s/rad]", "R^2");
  for (int j = 0; j < 4; ++j)
    std::printf("%-11s %12.6f %14.6f %8.4f\n", names[j], fit.params.c0(j), fit.params.c1(j), fit.r_squared(j));
  std::printf("samples %d\n", fit.samples);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-exoskeleton interaction torque control: simulation, metrics and identification"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "RNG seed (overrides the scenario seed)");

  auto* run = app.add_subcommand("run", "run a scenario config and write its log");
  std::string run_cfg, run_out;
  std::optional<double> run_duration;
  run->add_option("config", run_cfg, "scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_out, "log CSV path (default: <config stem>.csv)");
  run->add_option("--duration", run_duration, "override duration [s]")->check(CLI::PositiveNumber);

  auto* met = app.add_subcommand("metrics", "phase-windowed interaction torque report");
  std::string met_log;
  double met_mass = 71.6;
  bool met_csv = false;
  met->add_option("log", met_log, "simulation log CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--mass", met_mass, "body mass for normalization [kg]")->check(CLI::PositiveNumber);
  met->add_flag("--csv", met_csv, "CSV output");

  auto* idf = app.add_subcommand("identify", "friction identification from a hanging chirp record");
  std::string id_csv, id_model;
  bool id_no_lowpass = false;
  double id_cutoff = 10.0;
  int id_trim = 8;
  idf->add_option("csv", id_csv, "identification CSV")->required()->check(CLI::ExistingFile);
  idf->add_option("--model", id_model, "model JSON (default: built-in)")->check(CLI::ExistingFile);
  idf->add_flag("--no-lowpass", id_no_lowpass, "do not filter the differentiated acceleration");
  idf->add_option("--cutoff", id_cutoff, "acceleration low-pass cutoff [Hz]")->check(CLI::PositiveNumber);
  idf->add_option("--trim", id_trim, "samples dropped at each end")->check(CLI::NonNegativeNumber);

  auto* cmp = app.add_subcommand("compare", "reports for two logs side by side");
  std::string cmp_a, cmp_b;
  double cmp_mass = 71.6;
  cmp->add_option("logA", cmp_a)->required()->check(CLI::ExistingFile);
  cmp->add_option("logB", cmp_b)->required()->check(CLI::ExistingFile);
  cmp->add_option("--mass", cmp_mass, "body mass [kg]")->check(CLI::PositiveNumber);

  auto* gam = app.add_subcommand("gamma", "double stance estimate change when gamma is forced to zero");
  std::string gam_log, gam_model;
  gam->add_option("log", gam_log)->required()->check(CLI::ExistingFile);
  gam->add_option("--model", gam_model, "model JSON (default: built-in)")->check(CLI::ExistingFile);

  auto* chk = app.add_subcommand("check", "run the invariant suite");
  int chk_samples = 200;
  chk->add_option("--samples", chk_samples, "random configurations per identity")->check(CLI::PositiveNumber);

  auto* syn = app.add_subcommand("synth-chirp", "write a synthetic identification record");
  std::string syn_out, syn_model;
  ChirpSpec spec;
  syn->add_option("output", syn_out)->required();
  syn->add_option("--amplitude", spec.amplitude, "chirp amplitude [N*m]")->check(CLI::PositiveNumber);
  syn->add_option("--period", spec.period, "chirp period [s]")->check(CLI::PositiveNumber);
  syn->add_option("--rate", spec.rate_hz, "sample rate [Hz]")->check(CLI::PositiveNumber);
  syn->add_option("--noise", spec.noise_fraction, "torque noise, fraction of peak")->check(CLI::NonNegativeNumber);
  syn->add_option("--model", syn_model, "model JSON (default: built-in)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      ScenarioConfig cfg = load_scenario_file(run_cfg);
      if (seed) cfg.seed = *seed;
      if (run_duration) cfg.duration = *run_duration;
      if (run_out.empty()) run_out = std::filesystem::path(run_cfg).stem().string() + ".csv";
      const SimLog log = run_scenario(cfg);
      write_simlog(run_out, log);
      print_log_summary(log, run_out);
    } else if (*met) {
      const SimLog log = read_simlog(met_log);
      const MetricReport r = mean_abs_interaction(log, phase_windows(log), met_mass);
      if (met_csv) print_report_csv(std::cout, r);
      else print_report(std::cout, r);
    } else if (*idf) {
      const ExoModel m = id_model.empty() ? default_model() : load_model_file(id_model);
      IdOptions opt;
      opt.lowpass = !id_no_lowpass;
      opt.cutoff_hz = id_cutoff;
      opt.trim = id_trim;
      print_friction(estimate_friction(m, read_id_csv(id_csv), opt));
    } else if (*cmp) {
      const SimLog a = read_simlog(cmp_a);
      const SimLog b = read_simlog(cmp_b);
      const MetricReport ra = mean_abs_interaction(a, phase_windows(a), cmp_mass);
      const MetricReport rb = mean_abs_interaction(b, phase_windows(b), cmp_mass);
      std::printf("mean |tau_int - tau_int*| [N*m/kg], body mass %.1f kg\n", cmp_mass);
      std::printf("%-6s %-12s %22s %22s %10s\n", "joint", "phase", ra.label.c_str(), rb.label.c_str(), "B - A");
      for (JointKind j : {JointKind::Hip, JointKind::Knee})
        for (Phase p : {Phase::WholeCycle, Phase::Stance, Phase::Swing}) {
          const MetricCell& x = ra.at(j, p);
          const MetricCell& y = rb.at(j, p);
          std::printf("%-6s %-12s %12.4f +- %6.4f %12.4f +- %6.4f %10.4f\n", to_string(j), to_string(p), x.mean,
                      x.std, y.mean, y.std, y.mean - x.mean);
        }
    } else if (*gam) {
      const ExoModel m = gam_model.empty() ? default_model() : load_model_file(gam_model);
      const GammaComparison g = compare_gamma_zero(read_simlog(gam_log), m);
      std::printf("double stance samples %zu\n", g.samples);
      static const char* rows[5] = {"backpack", "left hip", "left knee", "right hip", "right knee"};
      std::printf("%-11s %24s\n", "coordinate", "mean |d tau_int| [N*m]");
      for (int i = 0; i < 5; ++i) std::printf("%-11s %24.6g\n", rows[i], g.mean_abs_diff(i));
    } else if (*chk) {
      const auto results = run_invariant_checks(seed.value_or(1), chk_samples);
      bool ok = true;
      for (const CheckResult& r : results) {
        std::printf("%s  %-70s worst %.3g (tol %.3g)%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                    r.tolerance, r.detail.empty() ? "" : "  ", r.detail.c_str());
        ok = ok && r.pass;
      }
      return ok ? 0 : 1;
    } else if (*syn) {
      if (seed) spec.seed = *seed;
      const ExoModel m = syn_model.empty() ? default_model() : load_model_file(syn_model);
      write_id_csv(syn_out, synthesize_chirp(m, spec));
      std::printf("wrote %s\n", syn_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
