#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nn/random.hpp"
#include "nn/tensor.hpp"

namespace svc::nn {

// One differentiable function to verify: inputs -> single output tensor.
// The harness reduces the output with a fixed random weighting to a scalar,
// runs backward, and compares every input gradient element against central
// finite differences at double precision.
struct GradcheckCase {
  std::string name;
  std::vector<Shape> input_shapes;
  std::function<int(Tape<double>&, const std::vector<int>& inputs)> build;
  // Optional custom input generator (e.g. keep log/sqrt inputs positive,
  // keep kinked ops away from their kinks).
  std::function<void(std::vector<std::vector<double>>&, Pcg32&)> init;
  // Test fixture hook: corrupts the analytic gradients before comparison so
  // a broken backward pass is provably reported. Unset in the default suite.
  std::function<void(std::vector<std::vector<double>>&)> tamper_analytic;
};

struct GradcheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  double tolerance = 0.0;
  std::vector<GradcheckEntry> entries;
  bool all_pass = false;

  std::string to_text() const;
};

// Covers every op class the tape registers.
std::vector<GradcheckCase> default_gradcheck_cases();

GradcheckReport run_gradcheck(const std::vector<GradcheckCase>& cases, uint64_t seed,
                              double tolerance = 1e-4, double fd_step = 1e-4);

}  // namespace svc::nn
