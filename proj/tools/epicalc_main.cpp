#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "epicalc/problem_io.hpp"
#include "epicalc/selftest.hpp"

namespace {

struct ScheduleFlags {
  std::optional<double> tau0, ratio, radius_factor;
  std::optional<int> levels, samples;
  std::optional<std::uint64_t> seed;

  bool any() const {
    return tau0 || ratio || radius_factor || levels || samples || seed;
  }
  epicalc::Schedule apply(epicalc::Schedule base) const {
    if (tau0) base.tau0 = *tau0;
    if (ratio) base.ratio = *ratio;
    if (levels) base.levels = *levels;
    if (samples) base.samples_per_level = *samples;
    if (radius_factor) base.radius_factor = *radius_factor;
    if (seed) base.seed = *seed;
    return base;
  }
};

void add_schedule_flags(CLI::App* cmd, ScheduleFlags& flags) {
  cmd->add_option("--tau0", flags.tau0, "initial quotient step");
  cmd->add_option("--ratio", flags.ratio, "geometric step ratio in (0,1)");
  cmd->add_option("--levels", flags.levels, "number of refinement levels");
  cmd->add_option("--samples", flags.samples, "samples per level");
  cmd->add_option("--radius-factor", flags.radius_factor, "neighborhood radius per unit step");
  cmd->add_option("--seed", flags.seed, "sampler seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form first/second/parabolic subderivative calculus with "
               "finite-difference verification"};
  app.require_subcommand(1);

  // run
  std::string problem_path, out_path;
  bool with_oracle = false;
  std::optional<double> tol;
  ScheduleFlags run_sched;
  CLI::App* run = app.add_subcommand("run", "evaluate the queries of a problem file");
  run->add_option("problem", problem_path, "problem description (JSON)")->required();
  run->add_option("--out", out_path, "write a structured line-delimited report here");
  run->add_flag("--oracle", with_oracle, "attach estimator cross-checks to value queries");
  run->add_option("--tol", tol, "override the oracle agreement tolerance");
  std::optional<double> eps_act, eps_dir;
  run->add_option("--eps-act", eps_act, "polyhedral activity detection tolerance");
  run->add_option("--eps-dir", eps_dir, "tangent direction test tolerance");
  add_schedule_flags(run, run_sched);

  // selftest
  std::string filter;
  std::uint64_t st_seed = 42;
  CLI::App* st = app.add_subcommand("selftest", "run the built-in golden battery");
  st->add_option("--filter", filter, "only run checks whose name contains this substring");
  st->add_option("--seed", st_seed, "battery seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    try {
      epicalc::ProblemSpec spec = epicalc::parse_problem_file(problem_path);
      epicalc::RunOptions opts;
      opts.with_oracle = with_oracle;
      opts.out_path = out_path;
      opts.tol_override = tol;
      opts.eps_act_override = eps_act;
      opts.eps_dir_override = eps_dir;
      if (run_sched.any()) opts.schedule_override = run_sched.apply(spec.schedule);
      return epicalc::run_problem(spec, opts, std::cout);
    } catch (const epicalc::ProblemError& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  auto summary = epicalc::run_selftest(filter, st_seed, std::cout);
  return summary.failures == 0 ? 0 : 1;
}
