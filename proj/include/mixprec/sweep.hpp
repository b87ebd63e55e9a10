#pragma once

// Threshold-grid sweep: classify per vector, dedupe by ICS, evaluate each
// unique variant once, and build the result/instruction-change equivalence
// report with prime threshold vectors.

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mixprec/bench.hpp"
#include "mixprec/rewrite.hpp"

namespace mixprec {

struct GridSpec {
  std::array<std::vector<double>, 7> samples;  // sorted ascending per component
  size_t size() const;
};

// The default sample grid: 6 values per threshold.
GridSpec default_grid();
// k of the default values per component (indices spread across the range).
GridSpec desk_grid(int k);
// Config file: lines "t1=1,5,10" .. "t7=...".
GridSpec load_grid(const std::string& path);

// Full Cartesian product in deterministic order (t7 varies fastest).
std::vector<ThresholdVector> enumerate_grid(const GridSpec& g);

struct CostModel {
  enum class Kind { Scalar, Vector };
  Kind kind = Kind::Scalar;
  double width_bits = 256;  // SIMD width for the vector model
  double shuffle = -1;      // cast surcharge; default 64/width

  static CostModel scalar() { return {Kind::Scalar, 0, 0}; }
  static CostModel vec(double width = 256, double shuffle = -1) {
    return {Kind::Vector, width, shuffle};
  }
};

// Analytic cost of a dynamic op mix. Scalar: every float op and cast costs
// 1. Vector: f32 ops cost 32/W, f64 ops 64/W, casts 64/W plus the shuffle
// surcharge. Loads, stores and integer ops are outside the model.
double cost_estimate(const std::map<std::pair<Opcode, Type>, uint64_t>& counts,
                     const CostModel& model);

struct SweepRecord {
  ThresholdVector t;
  std::string ics_id;
  std::string result_id;
  double accuracy = 0;
  double promoted_fraction = 0;
  double scalar_cost = 0;
  double vector_cost = 0;
};

struct ResultGroup {
  std::string result_id;
  double accuracy = 0;
  uint64_t vector_count = 0;
  std::vector<std::string> ics_ids;          // distinct ICSs mapping here
  std::vector<ThresholdVector> primes;       // non-redundant vectors
  double promoted_min = 0, promoted_mean = 0, promoted_max = 0;
};

struct ICGroup {
  std::string ics_id;
  std::string result_id;
  uint64_t vector_count = 0;
  uint64_t ics_size = 0;
  double promoted_fraction = 0;
};

struct EquivalenceReport {
  uint64_t grid_size = 0;
  std::vector<ResultGroup> results;  // sorted worst accuracy first
  std::vector<ICGroup> ic_sets;
};

struct SweepOptions {
  Metric metric = Metric::AbsError;
  int jobs = 1;
  bool dedupe = true;          // false = brute force, one evaluation per vector
  bool compute_primes = true;
  CostModel vector_model = CostModel::vec();
  KernelConfig kernel;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // grid enumeration order
  EquivalenceReport report;
  NumericalProfile profile;          // training profile
  double single_error = 0;           // uniform-f32 accuracy vs the baseline
  std::string single_result_id;
  std::string double_result_id;
};

SweepResult run_sweep(const Program& p, const ExecInput& train, const ExecInput& eval,
                      const std::vector<ThresholdVector>& grid, const SweepOptions& opts,
                      const GridSpec* axes = nullptr);

// Redundancy by threshold-vector dominance within one result-equivalent
// set; `axes` enables the lattice shortcut when the vectors lie on a grid.
std::vector<ThresholdVector> prime_vectors(const std::vector<ThresholdVector>& rset,
                                           const GridSpec* axes = nullptr);

std::string sweep_csv(const std::vector<SweepRecord>& records);
nlohmann::json report_to_json(const EquivalenceReport& rep);

}  // namespace mixprec
