#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace testsup {

struct WallTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// One acceptance criterion: named sub-checks, a wall-clock budget, and a
// single PASS/FAIL summary line on stdout. The Catch assertion fires after
// the line is printed so a red run still shows the full scoreboard.
struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds;
  WallTimer timer;
  std::vector<std::pair<std::string, bool>> checks;

  Criterion(std::string id_, std::string title_, double budget)
      : id(std::move(id_)), title(std::move(title_)), budget_seconds(budget) {}

  void check(const std::string& name, bool ok) { checks.emplace_back(name, ok); }

  void finish() {
    const double elapsed = timer.seconds();
    check("runtime within budget", elapsed <= budget_seconds);
    bool all = true;
    for (const auto& [name, ok] : checks) all = all && ok;
    std::printf("ACCEPTANCE %-4s %s  %s  (%.1fs of %.0fs budget)\n", id.c_str(),
                all ? "PASS" : "FAIL", title.c_str(), elapsed, budget_seconds);
    for (const auto& [name, ok] : checks)
      if (!ok) std::printf("ACCEPTANCE %-4s   failed check: %s\n", id.c_str(), name.c_str());
    std::fflush(stdout);
    for (const auto& [name, ok] : checks) {
      INFO(id << ": " << name);
      CHECK(ok);
    }
    REQUIRE(all);
  }
};

}  // namespace testsup
