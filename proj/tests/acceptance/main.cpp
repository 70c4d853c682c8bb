#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <set>

#include "criteria.hpp"

int main(int argc, char** argv) {
  CLI::App app{"loader_rl acceptance criteria"};
  std::filesystem::path work_dir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory for training runs");
  app.add_option("--criteria", only, "run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);

  // command output would interleave with the PASS/FAIL lines
  spdlog::set_level(spdlog::level::warn);
  std::filesystem::create_directories(work_dir);
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : loader_rl::acceptance::criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    loader_rl::acceptance::Verdict o;
    try {
      o = c.run(work_dir);
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failures;
    fmt::print("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
