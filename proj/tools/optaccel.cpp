// optaccel: run experiment specs, acceptance suites, plot-data export and
// schedule inspection.
//
// Exit codes: 0 success, 1 criterion failure, 2 usage or config error,
// 3 runtime failure.

#include "optaccel/experiment.hpp"
#include "optaccel/plotdata.hpp"
#include "optaccel/schedule.hpp"
#include "optaccel/trace.hpp"
#include "optaccel/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kCriterionFailure = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct RunArgs {
  std::string spec;
  std::string out;
  std::int64_t workers = 0;
};

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 0;
  std::int64_t workers = 1;
  std::string json_out;
};

struct PlotArgs {
  std::string kind;
  std::vector<std::string> files;
  std::string out;
};

struct ScheduleArgs {
  double H = 1.0;
  std::int64_t b = 1;
  std::int64_t T = 1;
  double B = 1.0;
  double lstar = 0.0;
  double sigma_sq = -1.0;
};

int cmd_run(const RunArgs& a) {
  optaccel::ExperimentSpec spec;
  optaccel::RunExperimentOptions options;
  try {
    spec = optaccel::load_spec(a.spec);
    if (!a.out.empty()) options.output_dir = a.out;
    if (a.workers > 0) options.workers = a.workers;
    else options.workers = optaccel::effective_workers(spec);
  } catch (const optaccel::ConfigError& e) {
    std::cerr << "optaccel run: " << e.what() << '\n';
    return kUsage;
  }
  const optaccel::Manifest m = optaccel::run_experiment(spec, options);
  std::cout << "files: " << m.files.size() << "\nfailures: " << m.failures.size()
            << "\ndigest: " << m.digest() << '\n';
  for (const auto& f : m.failures) std::cerr << "failed " << f.cell << ": " << f.reason << '\n';
  return m.failures.empty() ? kOk : kRuntime;
}

int cmd_verify(const VerifyArgs& a) {
  optaccel::VerifyOptions o;
  o.seed = a.seed;
  o.workers = a.workers;
  const optaccel::SuiteReport rep = optaccel::run_suite(a.suite, o);
  const std::string json = rep.to_json().dump(2);
  if (a.json_out.empty()) {
    std::cout << json << '\n';
  } else {
    std::ofstream(a.json_out) << json << '\n';
  }
  std::cerr << rep.summary_text() << "content hash: " << rep.content_hash() << '\n';
  return rep.passed() ? kOk : kCriterionFailure;
}

int cmd_plotdata(const PlotArgs& a) {
  std::vector<std::filesystem::path> inputs(a.files.begin(), a.files.end());
  for (const auto& p : inputs) {
    if (!std::filesystem::exists(p)) {
      std::cerr << "optaccel plotdata: missing input: " << p.string() << '\n';
      return kUsage;
    }
  }
  const std::string csv = optaccel::emit_plotdata(a.kind, inputs);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream(a.out) << csv;
  }
  return kOk;
}

int cmd_schedule(const ScheduleArgs& a) {
  const double noise = a.sigma_sq >= 0.0 ? a.sigma_sq : 2.0 * a.H * a.lstar;
  optaccel::StepSchedule s;
  try {
    s = optaccel::make_schedule(a.H, a.b, a.T, a.B, noise);
  } catch (const std::invalid_argument& e) {
    std::cerr << "optaccel schedule: " << e.what() << '\n';
    return kUsage;
  }
  std::cout << "gamma," << optaccel::format_double(s.gamma) << "\nnoise_sq,"
            << optaccel::format_double(noise) << "\n\nt,beta_t,gamma_t\n";
  for (std::int64_t t = 0; t < s.T; ++t) {
    std::cout << t << ',' << optaccel::format_double(s.beta(t)) << ','
              << optaccel::format_double(s.step(t)) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated minibatch SGD experiments and acceptance suites", "optaccel"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run every cell of an experiment spec");
  run->add_option("spec", run_args.spec, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_args.out, "Output directory (overrides the spec)");
  run->add_option("--workers", run_args.workers, "Worker threads (overrides spec and OPTACCEL_WORKERS)")
      ->check(CLI::PositiveNumber);

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run an acceptance suite and print a JSON report");
  verify->add_option("suite", verify_args.suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(optaccel::suite_names()));
  verify->add_option("--seed", verify_args.seed, "Base seed");
  verify->add_option("--workers", verify_args.workers, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--json", verify_args.json_out, "Write the JSON report here instead of stdout");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plotdata", "Emit tidy plot-ready CSV from run outputs");
  plot->add_option("kind", plot_args.kind, "rate_curve | speedup_curve | stage_decay")
      ->required()
      ->check(CLI::IsMember(optaccel::plotdata_kinds()));
  plot->add_option("files", plot_args.files, "summary.csv, speedup.csv or trace CSV files")->required();
  plot->add_option("--out", plot_args.out, "Write CSV here instead of stdout");

  ScheduleArgs sched_args;
  auto* sched = app.add_subcommand("schedule", "Print gamma and the beta_t / gamma_t table");
  sched->add_option("--H", sched_args.H, "Smoothness H")->required();
  sched->add_option("--b", sched_args.b, "Minibatch size")->required();
  sched->add_option("--T", sched_args.T, "Horizon")->required();
  sched->add_option("--B", sched_args.B, "Radius B")->required();
  sched->add_option("--lstar", sched_args.lstar, "Upper bound on L* (noise_sq = 2 H L*)");
  sched->add_option("--sigma-sq", sched_args.sigma_sq, "sigma*^2, replaces 2 H L*");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*verify) return cmd_verify(verify_args);
    if (*plot) return cmd_plotdata(plot_args);
    if (*sched) return cmd_schedule(sched_args);
  } catch (const optaccel::ConfigError& e) {
    std::cerr << "optaccel: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "optaccel: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "optaccel: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
