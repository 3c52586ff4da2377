#include "doctest.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "epicalc/problem_io.hpp"

using namespace epicalc;
using nlohmann::json;

namespace {

int run_text(const std::string& text, std::string* human_out = nullptr,
             const std::string& report_path = "") {
  ProblemSpec spec = parse_problem_text(text);
  RunOptions opts;
  opts.out_path = report_path;
  std::ostringstream human;
  int code = run_problem(spec, opts, human);
  if (human_out) *human_out = human.str();
  return code;
}

}  // namespace

TEST_CASE("minimal problems parse and run") {
  std::string text = R"({
    "instance": {"kind": "scad", "lambda": 1.0, "a": 3.0},
    "queries": [
      {"op": "eval", "x": [2.0]},
      {"op": "subderivative", "x": [0.0], "w": [1.0]},
      {"op": "check_regularity", "x": [2.0], "v": [0.5], "w": [1.0]}
    ]
  })";
  std::string human;
  CHECK(run_text(text, &human) == 0);
  CHECK(human.find("PASS") != std::string::npos);
}

TEST_CASE("malformed problems exit through ProblemError") {
  CHECK_THROWS_AS(parse_problem_text("{ not even json"), ProblemError);
  CHECK_THROWS_AS(parse_problem_text(R"({"queries": []})"), ProblemError);
  CHECK_THROWS_AS(parse_problem_text(R"({"instance": {"kind": "nope"}, "queries": [{}]})"),
                  ProblemError);
  // Dimension mismatch.
  CHECK_THROWS_WITH_AS(parse_problem_text(R"({
    "instance": {"kind": "scad"},
    "queries": [{"op": "eval", "x": [1.0, 2.0]}]
  })"),
                       doctest::Contains("dimension mismatch"), ProblemError);
  // Missing required field for the op.
  CHECK_THROWS_WITH_AS(parse_problem_text(R"({
    "instance": {"kind": "scad"},
    "queries": [{"op": "subderivative", "x": [1.0]}]
  })"),
                       doctest::Contains("required"), ProblemError);
  // Unknown op.
  CHECK_THROWS_AS(parse_problem_text(R"({
    "instance": {"kind": "scad"},
    "queries": [{"op": "gradient", "x": [1.0]}]
  })"),
                  ProblemError);
  // Bad schedule.
  CHECK_THROWS_AS(parse_problem_text(R"({
    "instance": {"kind": "scad"},
    "queries": [{"op": "eval", "x": [1.0]}],
    "schedule": {"ratio": 2.0}
  })"),
                  ProblemError);
}

TEST_CASE("failing verdicts yield exit code 1") {
  // An intentionally impossible tolerance forces a FAIL verdict.
  std::string text = R"({
    "instance": {"kind": "scad", "lambda": 1.0, "a": 3.0},
    "queries": [{"op": "oracle_compare", "target": "subderivative", "x": [0.7], "w": [1.0]}],
    "tolerances": {"first": 1e-18}
  })";
  CHECK(run_text(text) == 1);
}

TEST_CASE("custom piecewise instances evaluate polynomials") {
  std::string text = R"({
    "instance": {
      "kind": "custom_pwtd", "dim": 2, "regular": true,
      "pieces": [
        {"region": {"ineq": [[1, 0, 0]]},
         "poly": [{"coeff": 1.0, "powers": [2, 0]}, {"coeff": 1.0, "powers": [0, 2]}]},
        {"region": {"ineq": [[-1, 0, 0]]},
         "poly": [{"coeff": 1.0, "powers": [0, 2]}]}
      ]
    },
    "queries": [
      {"op": "eval", "x": [-2.0, 1.0]},
      {"op": "subderivative", "x": [0.0, 1.0], "w": [-1.0, 0.0]},
      {"op": "parabolic", "x": [0.0, 1.0], "w": [-1.0, 0.0], "z": [0.0, 0.0]}
    ]
  })";
  std::string human;
  CHECK(run_text(text, &human) == 0);
  // x^2 + y^2 on the left piece at (-2, 1) -> 5; pieces disagree on values, so
  // the shared boundary x = 0 must still agree (both give y^2): it does.
  CHECK(human.find("value=5.0") != std::string::npos);
  // Degree-5 polynomials are rejected.
  CHECK_THROWS_AS(parse_problem_text(R"({
    "instance": {"kind": "custom_pwtd", "dim": 1,
      "pieces": [{"region": {}, "poly": [{"coeff": 1.0, "powers": [5]}]}]},
    "queries": [{"op": "eval", "x": [0.0]}]
  })"),
                  ProblemError);
}

TEST_CASE("smooth polynomial composite end to end") {
  std::string text = R"({
    "instance": {
      "kind": "smooth_poly_composite",
      "theta": {"kind": "orthant", "m": 1},
      "f": {"dim_in": 2, "components": [
        [{"coeff": 1.0, "powers": [2, 0]}, {"coeff": 1.0, "powers": [0, 1]},
         {"coeff": -1.0, "powers": [0, 0]}]
      ]}
    },
    "queries": [
      {"op": "eval", "x": [0.0, 1.0]},
      {"op": "second_subderivative", "x": [0.0, 1.0], "v": [0.0, 1.0], "w": [2.0, 0.0]}
    ]
  })";
  std::string human;
  CHECK(run_text(text, &human) == 0);
  CHECK(human.find("value=8.0") != std::string::npos);  // 2 w1^2 at w1 = 2
}

TEST_CASE("structured reports round-trip bit-exactly") {
  const std::string path = "report_roundtrip_test.jsonl";
  std::string text = R"({
    "instance": {"kind": "group_scad", "lambda": 1.0, "a": 3.0, "q": 2.0,
                 "partition": [[0, 1], [2, 3]]},
    "queries": [
      {"op": "eval", "x": [0.1234567890123456, 0, 3, 4]},
      {"op": "subderivative", "x": [0, 0, 3, 4], "w": [0.3333333333333333, 4, 0, 0]},
      {"op": "eval", "x": [0, 0, 0, 1e300]},
      {"op": "second_subderivative", "x": [0, 0, 3, 4], "v": [0, 0, 0, 0], "w": [1, 0, 0, 0]}
    ]
  })";
  CHECK(run_text(text, nullptr, path) == 0);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int records = 0;
  ProblemSpec spec = parse_problem_text(text);
  while (std::getline(in, line)) {
    json rec = json::parse(line);
    ++records;
    // Re-serialize and re-parse: every numeric payload must survive exactly.
    json again = json::parse(rec.dump());
    CHECK(again == rec);
    if (rec["op"] == "eval" && rec["query"] == 0) {
      double got = rec["value"].get<double>();
      double expect = f_eval(spec.instance.cf, {0.1234567890123456, 0, 3, 4}).value();
      CHECK(got == expect);  // bit-exact
    }
    if (rec["query"] == 3) CHECK(rec["value"] == "+inf");
  }
  CHECK(records == 4);
  std::remove(path.c_str());
}
