#pragma once

// Program transformation: the single-instruction pass and the cancellation
// cascade pass produce an instruction change set; the rewriter promotes its
// members to f64 and inserts the casts that keep the program valid.

#include <nlohmann/json_fwd.hpp>

#include <set>
#include <string>
#include <vector>

#include "mixprec/classify.hpp"
#include "mixprec/nir.hpp"

namespace mixprec {

struct InstructionChangeSet {
  std::vector<InstrId> promoted;  // sorted by (function, dest)

  static InstructionChangeSet from_set(const std::set<InstrId>& s);
  std::set<InstrId> as_set() const;
  std::string id() const;  // canonical content hash
  bool operator==(const InstructionChangeSet&) const = default;
};

// Backward reachability from a cancellation seed over def-use edges.
// Benign members, loads, constants, parameters and intrinsic calls are
// stops; phis and casts are traversed through but never included.
std::set<InstrId> backward_slice(const InstrId& seed, const DefUseGraph& g,
                                 const std::set<InstrId>& benign, const InstrIndex& ix);

// promotion bin + union of cancellation-seed slices.
InstructionChangeSet compute_ics(const Classification& cl, const Program& p);

// Promotes every ICS member to f64. Float phis carrying a promoted value
// are retyped so the value is not quantized in flight; every remaining
// width mismatch gets one shared fpext/fptrunc per producer. Storage types
// never change. The result always validates.
Program rewrite_program(const Program& p, const InstructionChangeSet& ics);

nlohmann::json ics_to_json(const InstructionChangeSet& ics);
InstructionChangeSet ics_from_json(const nlohmann::json& j);

}  // namespace mixprec
