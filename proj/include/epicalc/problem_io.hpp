#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epicalc/composite.hpp"
#include "epicalc/instances.hpp"
#include "epicalc/oracle.hpp"

namespace epicalc {

// Raised for malformed problem files; the CLI maps it to exit code 2.
struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Query {
  std::string op;      // eval | subderivative | second_subderivative | parabolic |
                       // check_regularity | oracle_compare
  std::string target;  // oracle_compare only
  Vec x, v, w, z;
  bool has_v = false, has_w = false, has_z = false;
};

// A built instance plus the family tag deciding which operation set applies.
struct Instance {
  enum class Family { Pwtd, Composite, Psd };
  Family family = Family::Pwtd;
  std::string kind;
  PwtdFunction psi;
  CompositeFunction cf;
  int psd_n = 0;
};

struct ProblemSpec {
  Instance instance;
  std::vector<Query> queries;
  Schedule schedule;
  PwtdTol op_tol;            // activity/direction/criticality tolerances
  double tol_first = 1e-4;   // first-order oracle agreement
  double tol_second = 1e-5;  // floor for second-order/parabolic agreement
  double reg_pass_tol = 1e-3 + 1e-6;
};

// Parses and validates a problem description (dimensions, required fields).
ProblemSpec parse_problem_text(const std::string& text);
ProblemSpec parse_problem_file(const std::string& path);

struct RunOptions {
  bool with_oracle = false;
  std::string out_path;  // structured JSONL report when nonempty
  std::optional<Schedule> schedule_override;
  std::optional<double> tol_override;
  std::optional<double> eps_act_override;  // polyhedral activity detection
  std::optional<double> eps_dir_override;  // tangent direction tests
};

// Executes all queries, writes the human-readable report to `human` and the
// structured one to the options' out file. Returns the process exit code:
// 0 all verdict-bearing queries pass, 1 some fail, 2 reserved for input
// errors (thrown as ProblemError before execution starts).
int run_problem(const ProblemSpec& spec, const RunOptions& opts, std::ostream& human);

}  // namespace epicalc
