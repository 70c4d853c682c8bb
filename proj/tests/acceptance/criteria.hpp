#ifndef LOADER_RL_TESTS_ACCEPTANCE_CRITERIA_HPP_
#define LOADER_RL_TESTS_ACCEPTANCE_CRITERIA_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace loader_rl::acceptance {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Verdict(const std::filesystem::path& work_dir)> run;
};

// All eight criteria in order. Tolerances and budgets are fixed inside.
std::vector<Criterion> criteria();

}  // namespace loader_rl::acceptance

#endif  // LOADER_RL_TESTS_ACCEPTANCE_CRITERIA_HPP_
