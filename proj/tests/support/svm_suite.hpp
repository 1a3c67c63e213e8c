#pragma once

#include <string>
#include <vector>

// Enumerated tiny SVM problems checked against the brute-force dual.
namespace svm_suite {

struct CaseResult {
  std::string label;
  double objective_gap = 0.0;   // |D(smo) - D(oracle)|
  double kkt_violation = 0.0;   // worst KKT residual of the SMO solution
  double box_violation = 0.0;   // distance outside [0, C]
  double equality_residual = 0.0;
  std::size_t probes = 0;
  std::size_t mismatches = 0;   // probe sign disagreements outside the oracle's dead band
};

// Every dataset of 2 to 4 distinct points drawn from a fixed 2-D point
// list, every labelling containing both classes (first point fixed to +1),
// crossed with linear/rbf kernels and C in {0.5, 1, 2}.
std::vector<CaseResult> run_all();

}  // namespace svm_suite
