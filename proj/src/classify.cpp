#include "mixprec/classify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mixprec {

double ThresholdVector::comp(int i) const {
  switch (i) {
    case 0: return t1;
    case 1: return t2;
    case 2: return t3;
    case 3: return t4;
    case 4: return t5;
    case 5: return t6;
    case 6: return t7;
  }
  throw Error("threshold component out of range");
}

std::string ThresholdVector::to_string() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "t1=%.9g,t2=%.9g,t3=%.9g,t4=%d,t5=%d,t6=%.9g,t7=%.9g",
                t1, t2, t3, t4, t5, t6, t7);
  return buf;
}

ThresholdVector parse_threshold_vector(const std::string& spec) {
  ThresholdVector t;
  bool seen[7] = {};
  std::istringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos || eq < 2 || part[0] != 't')
      throw Error("bad threshold spec component '" + part + "'");
    int i = part[1] - '1';
    if (i < 0 || i > 6) throw Error("bad threshold name in '" + part + "'");
    double v = std::strtod(part.c_str() + eq + 1, nullptr);
    switch (i) {
      case 0: t.t1 = v; break;
      case 1: t.t2 = v; break;
      case 2: t.t3 = v; break;
      case 3: t.t4 = static_cast<int>(v); break;
      case 4: t.t5 = static_cast<int>(v); break;
      case 5: t.t6 = v; break;
      case 6: t.t7 = v; break;
    }
    seen[i] = true;
  }
  for (int i = 0; i < 7; ++i)
    if (!seen[i]) throw Error("threshold t" + std::to_string(i + 1) + " missing");
  return t;
}

int errratio_cutoff(double t2) {
  return static_cast<int>(std::ceil(std::log2(t2 / 100.0)));
}

bool cancellation_trigger(const ProfileEntry& e, const ThresholdVector& t) {
  return e.max_cancelled > t.t5;
}

bool promotion_trigger(const ProfileEntry& e, const ThresholdVector& t) {
  if (e.total == 0) return false;
  double total = static_cast<double>(e.total);
  // large round-off: more than t1% of instances above the t2% error ratio
  uint64_t hot = e.errratio_at_least(errratio_cutoff(t.t2));
  if (100.0 * static_cast<double>(hot) / total > t.t1) return true;
  // large addend exponent difference
  uint64_t wide = e.expdiff_above(t.t4);
  if (100.0 * static_cast<double>(wide) / total > t.t3) return true;
  // near overflow/underflow, including realized non-finite results
  if (e.max_abs > t.t6 || e.min_abs_nonzero < t.t7 || e.range_faults > 0) return true;
  return false;
}

Classification classify_profile(const NumericalProfile& np, const ThresholdVector& t) {
  Classification cl;
  for (const auto& [id, e] : np.entries) {
    if (cancellation_trigger(e, t)) {
      cl.cancellation_bin.insert(id);
    } else if (promotion_trigger(e, t)) {
      cl.promotion_bin.insert(id);
    } else if (e.exact == e.total) {
      cl.benign_bin.insert(id);
    } else {
      cl.other_bin.insert(id);
    }
  }
  return cl;
}

std::array<int, 7> monotone_direction() { return {-1, -1, -1, -1, -1, -1, +1}; }

bool dominates(const ThresholdVector& w, const ThresholdVector& v) {
  auto dir = monotone_direction();
  for (int i = 0; i < 7; ++i) {
    double a = w.comp(i), b = v.comp(i);
    if (dir[i] < 0 ? a > b : a < b) return false;
  }
  return true;
}

}  // namespace mixprec
