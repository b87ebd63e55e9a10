#pragma once

// Aggregates per-instance kernel outcomes into per-static-instruction
// profiles and attaches them to the data-flow graph.

#include <array>
#include <limits>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mixprec/interp.hpp"
#include "mixprec/nir.hpp"

namespace mixprec {

struct ProfileEntry {
  Opcode opcode = Opcode::FAdd;
  Intrinsic intr = Intrinsic::Sin;
  Type prec = Type::F32;  // precision the instances executed at
  uint64_t total = 0;
  uint64_t exact = 0;
  // bucket index = errratio_log + 64, range [-64, 64]
  std::array<uint64_t, 2 * kErrRatioClamp + 1> errratio_hist{};
  // addend exponent difference, clamped into [0, 255]; add/sub only
  std::array<uint64_t, 256> expdiff_hist{};
  int max_cancelled = 0;
  double max_abs = 0.0;
  double min_abs_nonzero = std::numeric_limits<double>::infinity();
  uint64_t range_faults = 0;

  std::string opcode_string() const;  // "fmul", "fcall sin", ...
  uint64_t errratio_at_least(int cutoff) const;  // instances with ratio >= cutoff
  uint64_t expdiff_above(int t4) const;          // instances with diff > t4
};

struct NumericalProfile {
  std::string program_hash;
  std::map<InstrId, ProfileEntry> entries;
};

// Sink that builds a NumericalProfile; one per run, merge explicitly.
struct ProfileCollector final : ProfileSink {
  NumericalProfile profile;
  void record(const InstrId& id, Opcode op, Intrinsic intr, Type prec,
              const FpOutcome& o) override;
};

// Profiles of the same program over split inputs merge to the profile of
// the concatenated run.
NumericalProfile merge_profiles(const NumericalProfile& a, const NumericalProfile& b);

struct AnnotatedDDFG {
  std::vector<InstrId> nodes;  // floating instructions only
  std::vector<std::pair<InstrId, InstrId>> edges;
  std::map<InstrId, std::string> labels;
};

struct ProfileRun {
  NumericalProfile profile;
  AnnotatedDDFG ddfg;
  ExecOutput output;
};

// Runs at declared precision with a collector attached; the output is
// bit-identical to an unprofiled run.
ProfileRun profile_program(const Program& p, const ExecInput& input,
                           const KernelConfig& kcfg = {});

AnnotatedDDFG annotate_ddfg(const Program& p, const NumericalProfile& np);

nlohmann::json profile_to_json(const NumericalProfile& np);
NumericalProfile profile_from_json(const nlohmann::json& j);
std::string ddfg_to_dot(const AnnotatedDDFG& g);

}  // namespace mixprec
