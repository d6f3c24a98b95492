// Runs the acceptance criteria and prints one PASS/FAIL line each.
// Usage: acceptance [quick|full] [--threads N] [--only A3,A4]
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "sphtap/acceptance.hpp"

using namespace sphtap::acceptance;

int main(int argc, char** argv) {
  Level level = Level::full;
  unsigned threads = 1;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "quick") {
      level = Level::quick;
    } else if (arg == "full") {
      level = Level::full;
    } else if (arg == "--threads" && i + 1 < argc) {
      threads = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string id; std::getline(ss, id, ',');) only.push_back(id);
    } else {
      std::fprintf(stderr, "usage: %s [quick|full] [--threads N] [--only A1,A2,...]\n", argv[0]);
      return 1;
    }
  }
  if (only.empty()) only = criterion_ids();

  int failed = 0;
  for (const std::string& id : only) {
    const Result r = run_criterion(id, level, threads);
    std::printf("%-4s %s  %s  [%.1fs]\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str(),
                r.seconds);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(only.size()) - failed, only.size());
  return failed ? 1 : 0;
}
