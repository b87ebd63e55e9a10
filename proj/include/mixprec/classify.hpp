#pragma once

// Threshold-driven classification of profiled instructions into the four
// bins, applied in strict priority order.

#include <array>
#include <set>
#include <string>

#include "mixprec/profiler.hpp"

namespace mixprec {

struct ThresholdVector {
  double t1 = 0;  // % of instances, round-off frequency
  double t2 = 0;  // % error ratio cutoff
  double t3 = 0;  // % of instances, exponent-difference frequency
  int t4 = 0;     // exponent difference cutoff
  int t5 = 0;     // cancelled-bits cutoff
  double t6 = 0;  // near-overflow magnitude
  double t7 = 0;  // near-underflow magnitude

  double comp(int i) const;  // 0-based component access
  bool operator==(const ThresholdVector&) const = default;
  std::string to_string() const;  // "t1=..,t2=..,...,t7=.."
};

// "t1=1,t2=25,t3=5,t4=16,t5=8,t6=1e30,t7=1e-38"
ThresholdVector parse_threshold_vector(const std::string& spec);

struct Classification {
  std::set<InstrId> cancellation_bin;
  std::set<InstrId> promotion_bin;
  std::set<InstrId> benign_bin;
  std::set<InstrId> other_bin;
};

// Quantized cutoff applied to the log error-ratio histogram: ceil(log2(t2%)).
int errratio_cutoff(double t2);

Classification classify_profile(const NumericalProfile& np, const ThresholdVector& t);

// Raw trigger predicates, exposed for the monotonicity properties.
bool cancellation_trigger(const ProfileEntry& e, const ThresholdVector& t);
bool promotion_trigger(const ProfileEntry& e, const ThresholdVector& t);

// Per-component direction in which moving a threshold can only grow every
// trigger set: -1 = decreasing, +1 = increasing.
std::array<int, 7> monotone_direction();

// True iff `w` is at least as promoting as `v` in every component (w's
// trigger sets contain v's by construction).
bool dominates(const ThresholdVector& w, const ThresholdVector& v);

}  // namespace mixprec
