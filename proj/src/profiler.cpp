#include "mixprec/profiler.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace mixprec {

using nlohmann::json;

std::string ProfileEntry::opcode_string() const {
  if (opcode == Opcode::FCall) return std::string("fcall ") + intrinsic_name(intr);
  return opcode_name(opcode);
}

uint64_t ProfileEntry::errratio_at_least(int cutoff) const {
  if (cutoff > kErrRatioClamp) return 0;
  int from = std::max(cutoff, -kErrRatioClamp);
  uint64_t n = 0;
  for (int r = from; r <= kErrRatioClamp; ++r) n += errratio_hist[r + kErrRatioClamp];
  return n;
}

uint64_t ProfileEntry::expdiff_above(int t4) const {
  uint64_t n = 0;
  for (int d = std::max(t4 + 1, 0); d < 256; ++d) n += expdiff_hist[d];
  return n;
}

void ProfileCollector::record(const InstrId& id, Opcode op, Intrinsic intr, Type prec,
                              const FpOutcome& o) {
  auto [it, fresh] = profile.entries.try_emplace(id);
  ProfileEntry& e = it->second;
  if (fresh) {
    e.opcode = op;
    e.intr = intr;
    e.prec = prec;
  }
  e.total += 1;
  if (o.range_fault) {
    e.range_faults += 1;
    e.errratio_hist[kErrRatioClamp + kErrRatioClamp] += 1;  // top bucket
    return;
  }
  if (!o.errratio_log) {
    e.exact += 1;
  } else {
    e.errratio_hist[*o.errratio_log + kErrRatioClamp] += 1;
  }
  if (op == Opcode::FAdd || op == Opcode::FSub) {
    int d = o.addend_expdiff;
    if (d > 255) d = 255;
    if (d < 0) d = 0;
    e.expdiff_hist[d] += 1;
    if (o.cancelled_bits > e.max_cancelled) e.max_cancelled = o.cancelled_bits;
  }
  if (o.abs_result > e.max_abs) e.max_abs = o.abs_result;
  if (o.abs_result > 0.0 && o.abs_result < e.min_abs_nonzero)
    e.min_abs_nonzero = o.abs_result;
}

NumericalProfile merge_profiles(const NumericalProfile& a, const NumericalProfile& b) {
  if (!a.program_hash.empty() && !b.program_hash.empty() &&
      a.program_hash != b.program_hash)
    throw Error("cannot merge profiles of different programs");
  NumericalProfile out = a;
  if (out.program_hash.empty()) out.program_hash = b.program_hash;
  for (const auto& [id, eb] : b.entries) {
    auto [it, fresh] = out.entries.try_emplace(id, eb);
    if (fresh) continue;
    ProfileEntry& e = it->second;
    e.total += eb.total;
    e.exact += eb.exact;
    for (size_t i = 0; i < e.errratio_hist.size(); ++i) e.errratio_hist[i] += eb.errratio_hist[i];
    for (size_t i = 0; i < e.expdiff_hist.size(); ++i) e.expdiff_hist[i] += eb.expdiff_hist[i];
    e.max_cancelled = std::max(e.max_cancelled, eb.max_cancelled);
    e.max_abs = std::max(e.max_abs, eb.max_abs);
    e.min_abs_nonzero = std::min(e.min_abs_nonzero, eb.min_abs_nonzero);
    e.range_faults += eb.range_faults;
  }
  return out;
}

ProfileRun profile_program(const Program& p, const ExecInput& input,
                           const KernelConfig& kcfg) {
  ProfileCollector sink;
  sink.profile.program_hash = program_hash(p);
  ProfileRun run;
  run.output = run_program(p, input, PrecisionAssignment::declared(), &sink, kcfg);
  run.profile = std::move(sink.profile);
  run.ddfg = annotate_ddfg(p, run.profile);
  return run;
}

AnnotatedDDFG annotate_ddfg(const Program& p, const NumericalProfile& np) {
  AnnotatedDDFG g;
  InstrIndex ix = index_program(p);
  for (const auto& f : p.functions) {
    DefUseGraph dug = def_use_graph(f);
    std::set<InstrId> floats;
    for (const auto& id : dug.nodes) {
      const Instr& in = *ix.by_id.at(id);
      if (defines_float(in)) floats.insert(id);
    }
    for (const auto& id : dug.nodes) {
      if (!floats.count(id)) continue;
      g.nodes.push_back(id);
      const Instr& in = *ix.by_id.at(id);
      std::ostringstream lbl;
      lbl << id.function << ":" << id.dest << "\\n";
      if (in.op == Opcode::FCall)
        lbl << "fcall " << intrinsic_name(in.intr) << ' ' << type_name(in.type);
      else if (in.op == Opcode::FConst || in.op == Opcode::Load || in.op == Opcode::Phi ||
               in.op == Opcode::FAdd || in.op == Opcode::FSub || in.op == Opcode::FMul ||
               in.op == Opcode::FDiv)
        lbl << opcode_name(in.op) << ' ' << type_name(in.type);
      else
        lbl << opcode_name(in.op);
      auto pe = np.entries.find(id);
      if (pe != np.entries.end()) {
        lbl << "\\ncancel=" << pe->second.max_cancelled << ",exact=" << pe->second.exact
            << "/" << pe->second.total;
      }
      g.labels[id] = lbl.str();
      for (const auto& user : dug.uses.at(id))
        if (floats.count(user)) g.edges.emplace_back(id, user);
    }
  }
  return g;
}

std::string ddfg_to_dot(const AnnotatedDDFG& g) {
  std::ostringstream os;
  os << "digraph ddfg {\n  node [shape=box];\n";
  for (const auto& id : g.nodes) {
    os << "  \"" << id.function << ":" << id.dest << "\" [label=\"" << g.labels.at(id)
       << "\"];\n";
  }
  for (const auto& [a, b] : g.edges) {
    os << "  \"" << a.function << ":" << a.dest << "\" -> \"" << b.function << ":"
       << b.dest << "\";\n";
  }
  os << "}\n";
  return os.str();
}

json profile_to_json(const NumericalProfile& np) {
  json j;
  j["program_hash"] = np.program_hash;
  json entries = json::array();
  for (const auto& [id, e] : np.entries) {
    json je;
    je["function"] = id.function;
    je["dest"] = id.dest;
    je["opcode"] = e.opcode_string();
    je["prec"] = type_name(e.prec);
    je["total"] = e.total;
    je["exact"] = e.exact;
    // fixed-width buckets: document size stays bound to the static shape
    json rh = json::array();
    for (uint64_t c : e.errratio_hist) rh.push_back(c);
    je["errratio_hist"] = rh;
    json eh = json::array();
    for (uint64_t c : e.expdiff_hist) eh.push_back(c);
    je["expdiff_hist"] = eh;
    je["max_cancel"] = e.max_cancelled;
    je["max_abs"] = e.max_abs;
    if (std::isinf(e.min_abs_nonzero))
      je["min_abs_nonzero"] = nullptr;
    else
      je["min_abs_nonzero"] = e.min_abs_nonzero;
    je["range_faults"] = e.range_faults;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

namespace {

std::pair<Opcode, Intrinsic> opcode_from_string(const std::string& s) {
  if (s.rfind("fcall ", 0) == 0) {
    std::string f = s.substr(6);
    if (f == "sin") return {Opcode::FCall, Intrinsic::Sin};
    if (f == "exp") return {Opcode::FCall, Intrinsic::Exp};
    if (f == "sqrt") return {Opcode::FCall, Intrinsic::Sqrt};
    if (f == "fabs") return {Opcode::FCall, Intrinsic::Fabs};
    throw Error("unknown intrinsic in profile: " + s);
  }
  if (s == "fadd") return {Opcode::FAdd, Intrinsic::Sin};
  if (s == "fsub") return {Opcode::FSub, Intrinsic::Sin};
  if (s == "fmul") return {Opcode::FMul, Intrinsic::Sin};
  if (s == "fdiv") return {Opcode::FDiv, Intrinsic::Sin};
  throw Error("unknown opcode in profile: " + s);
}

}  // namespace

NumericalProfile profile_from_json(const json& j) {
  NumericalProfile np;
  np.program_hash = j.at("program_hash").get<std::string>();
  for (const auto& je : j.at("entries")) {
    InstrId id{je.at("function").get<std::string>(), je.at("dest").get<std::string>()};
    ProfileEntry e;
    auto [op, intr] = opcode_from_string(je.at("opcode").get<std::string>());
    e.opcode = op;
    e.intr = intr;
    std::string prec = je.value("prec", "f32");
    e.prec = prec == "f64" ? Type::F64 : Type::F32;
    e.total = je.at("total").get<uint64_t>();
    e.exact = je.at("exact").get<uint64_t>();
    const auto& rh = je.at("errratio_hist");
    if (rh.size() != e.errratio_hist.size())
      throw Error("errratio histogram has the wrong bucket count");
    for (size_t i = 0; i < e.errratio_hist.size(); ++i)
      e.errratio_hist[i] = rh[i].get<uint64_t>();
    const auto& eh = je.at("expdiff_hist");
    if (eh.size() != e.expdiff_hist.size())
      throw Error("expdiff histogram has the wrong bucket count");
    for (size_t i = 0; i < e.expdiff_hist.size(); ++i)
      e.expdiff_hist[i] = eh[i].get<uint64_t>();
    e.max_cancelled = je.at("max_cancel").get<int>();
    e.max_abs = je.at("max_abs").get<double>();
    if (je.at("min_abs_nonzero").is_null())
      e.min_abs_nonzero = std::numeric_limits<double>::infinity();
    else
      e.min_abs_nonzero = je.at("min_abs_nonzero").get<double>();
    e.range_faults = je.at("range_faults").get<uint64_t>();
    np.entries[id] = std::move(e);
  }
  return np;
}

}  // namespace mixprec
