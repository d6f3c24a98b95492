#pragma once

#include <functional>
#include <string>
#include <vector>

namespace sphtap::acceptance {

enum class Level { quick, full };

struct Result {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

using Reporter = std::function<void(const Result&)>;

/// A1 ... A12 in order.
const std::vector<std::string>& criterion_ids();

/// One criterion. `quick` shrinks the expensive ones (largest N, sample
/// counts); `full` runs them at the documented scale. InputError for an
/// unknown id.
Result run_criterion(const std::string& id, Level level, unsigned threads);

/// All criteria, reporting each as soon as it finishes.
std::vector<Result> run_all(Level level, unsigned threads, const Reporter& report = {});

}  // namespace sphtap::acceptance
