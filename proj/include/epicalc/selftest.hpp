#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace epicalc {

struct SelftestSummary {
  int total = 0;
  int failures = 0;
};

// Runs the built-in golden battery and property suites, printing one line per
// check. `filter` restricts to checks whose name contains the substring
// (e.g. a module prefix like "pwtd"). Deterministic for a fixed seed.
SelftestSummary run_selftest(const std::string& filter, std::uint64_t seed, std::ostream& out);

}  // namespace epicalc
