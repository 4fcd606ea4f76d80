#pragma once

#include <functional>
#include <string>
#include <vector>

namespace physcast::gate {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured quantities
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  std::function<CriterionResult()> run;
};

// The ten acceptance criteria, in order.
const std::vector<Criterion>& criteria();

// Runs one criterion, converting exceptions into failures.
CriterionResult run(const Criterion& c);

// "PASS  <id> <name>: <detail> (<seconds> s)"
std::string format_line(const CriterionResult& r);

// Runs the selected criteria (all when `only` is empty), printing one line
// each through `print`. Returns true when every criterion passed.
bool run_all(const std::vector<int>& only, const std::function<void(const std::string&)>& print);

// Individual checks reused by the CLI.
CriterionResult check_gradients();
CriterionResult check_mask_oracle(int trials);

}  // namespace physcast::gate
