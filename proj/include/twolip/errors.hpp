#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twolip {

/// Thrown when a construction cannot satisfy its own validity checks
/// (e.g. a margin condition that keeps failing after all retries).
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when training produces a non-finite loss. Carries the loss trace
/// collected up to the failing step so callers can inspect the blow-up.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<std::pair<int, double>> trace)
      : std::runtime_error(what), loss_trace(std::move(trace)) {}

  std::vector<std::pair<int, double>> loss_trace;
};

}  // namespace twolip
