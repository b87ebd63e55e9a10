#include "mixprec/rewrite.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace mixprec {

using nlohmann::json;

InstructionChangeSet InstructionChangeSet::from_set(const std::set<InstrId>& s) {
  InstructionChangeSet ics;
  ics.promoted.assign(s.begin(), s.end());
  return ics;
}

std::set<InstrId> InstructionChangeSet::as_set() const {
  return {promoted.begin(), promoted.end()};
}

std::string InstructionChangeSet::id() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : promoted) {
    h = fnv1a(p.function.data(), p.function.size(), h);
    h = fnv1a(":", 1, h);
    h = fnv1a(p.dest.data(), p.dest.size(), h);
    h = fnv1a(";", 1, h);
  }
  return hash_hex(h);
}

std::set<InstrId> backward_slice(const InstrId& seed, const DefUseGraph& g,
                                 const std::set<InstrId>& benign, const InstrIndex& ix) {
  std::set<InstrId> included;
  std::set<InstrId> visited;
  std::vector<InstrId> work{seed};
  visited.insert(seed);
  auto classify_node = [&](const InstrId& id, bool is_seed) {
    const Instr& in = *ix.by_id.at(id);
    // traversed through but never promoted
    if (in.op == Opcode::Phi || in.op == Opcode::FpExt || in.op == Opcode::FpTrunc)
      return 1;
    if (is_seed) return 0;  // include + traverse
    if (benign.count(id)) return 2;  // stop
    if (in.op == Opcode::FAdd || in.op == Opcode::FSub || in.op == Opcode::FMul ||
        in.op == Opcode::FDiv)
      return 0;
    return 2;  // loads, constants, intrinsic calls, integer ops: stops
  };
  while (!work.empty()) {
    InstrId id = work.back();
    work.pop_back();
    int kind = classify_node(id, id == seed);
    if (kind == 2) continue;
    if (kind == 0) included.insert(id);
    auto it = g.operands.find(id);
    if (it == g.operands.end()) continue;
    for (const auto& prod : it->second)
      if (visited.insert(prod).second) work.push_back(prod);
  }
  return included;
}

InstructionChangeSet compute_ics(const Classification& cl, const Program& p) {
  InstrIndex ix = index_program(p);
  std::set<InstrId> promoted = cl.promotion_bin;
  std::map<std::string, DefUseGraph> graphs;
  for (const auto& f : p.functions) graphs.emplace(f.name, def_use_graph(f));
  for (const auto& seed : cl.cancellation_bin) {
    const auto& g = graphs.at(seed.function);
    auto slice = backward_slice(seed, g, cl.benign_bin, ix);
    promoted.insert(slice.begin(), slice.end());
  }
  for (const auto& id : promoted)
    if (cl.benign_bin.count(id)) throw Error("benign instruction in ICS: " + to_string(id));
  return InstructionChangeSet::from_set(promoted);
}

namespace {

struct DefLoc {
  bool is_param = false;
  int block = -1;
  int pos = -1;  // instruction index within block
};

struct FnRewriter {
  Function& f;
  const std::set<std::string>& promoted;  // dest names promoted in this function

  std::map<std::string, DefLoc> loc;
  std::map<std::string, Type> vtype;      // value type after retyping
  std::map<std::string, std::string> alias;  // removed fpext dest -> source
  std::set<std::string> names;            // all taken register names
  std::set<std::string> retyped_phis;
  // (value, want_f64) -> cast register name
  std::map<std::pair<std::string, bool>, std::string> cast_of;
  // insertion anchor -> casts to place there. anchor: (-1,-1) = entry top,
  // (b, -2) = after the phi group of block b, (b, k) = after instr k.
  std::map<std::pair<int, int>, std::vector<Instr>> pending;

  FnRewriter(Function& fn, const std::set<std::string>& prom) : f(fn), promoted(prom) {}

  Type type_of(const Instr& in) const {
    switch (in.op) {
      case Opcode::FpExt: return Type::F64;
      case Opcode::FpTrunc: return Type::F32;
      case Opcode::FConst:
      case Opcode::FAdd:
      case Opcode::FSub:
      case Opcode::FMul:
      case Opcode::FDiv:
      case Opcode::FCall:
      case Opcode::Load:
      case Opcode::Phi:
        return in.type;
      default:
        return Type::I64;
    }
  }

  void collect_defs() {
    for (const auto& prm : f.params) {
      names.insert(prm.name);
      if (!prm.type.is_array) {
        loc[prm.name] = {true, -1, -1};
        vtype[prm.name] = prm.type.elem;
      }
    }
    for (size_t b = 0; b < f.blocks.size(); ++b)
      for (size_t k = 0; k < f.blocks[b].instrs.size(); ++k) {
        const Instr& in = f.blocks[b].instrs[k];
        if (!defines_value(in.op)) continue;
        names.insert(in.dest);
        loc[in.dest] = {false, static_cast<int>(b), static_cast<int>(k)};
        vtype[in.dest] = type_of(in);
      }
  }

  std::string resolve(const std::string& reg) const {
    std::string r = reg;
    for (auto it = alias.find(r); it != alias.end(); it = alias.find(r)) r = it->second;
    return r;
  }

  // instruction positions move when redundant extends are erased
  void recollect_positions() {
    for (auto it = loc.begin(); it != loc.end();) {
      if (it->second.is_param)
        ++it;
      else
        it = loc.erase(it);
    }
    for (size_t b = 0; b < f.blocks.size(); ++b)
      for (size_t k = 0; k < f.blocks[b].instrs.size(); ++k) {
        const Instr& in = f.blocks[b].instrs[k];
        if (defines_value(in.op))
          loc[in.dest] = {false, static_cast<int>(b), static_cast<int>(k)};
      }
  }

  // drop fpext instructions whose operand turned f64 under promotion
  bool cleanup_exts() {
    bool any = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& b : f.blocks)
        for (auto it = b.instrs.begin(); it != b.instrs.end();) {
          if (it->op == Opcode::FpExt) {
            std::string src = resolve(it->args[0].reg);
            if (vtype.at(src) == Type::F64) {
              alias[it->dest] = src;
              it = b.instrs.erase(it);
              changed = true;
              any = true;
              continue;
            }
          }
          ++it;
        }
    }
    return any;
  }

  void promote_types() {
    for (auto& b : f.blocks)
      for (auto& in : b.instrs)
        if (defines_value(in.op) && promoted.count(in.dest) && is_promotable(in.op)) {
          in.type = Type::F64;
          vtype[in.dest] = Type::F64;
        }
  }

  // an f32 phi carrying a promoted (or retyped) value becomes f64 so the
  // value is not quantized in flight
  bool retype_phis() {
    bool any = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& b : f.blocks)
        for (auto& in : b.instrs) {
          if (in.op != Opcode::Phi || in.type != Type::F32) continue;
          bool carries = false;
          for (const auto& a : in.args) {
            if (a.is_imm) continue;
            std::string src = resolve(a.reg);
            if (promoted.count(src) || retyped_phis.count(src)) {
              carries = true;
              break;
            }
          }
          if (carries) {
            in.type = Type::F64;
            vtype[in.dest] = Type::F64;
            retyped_phis.insert(in.dest);
            changed = true;
            any = true;
          }
        }
    }
    return any;
  }

  std::string fresh_name(const std::string& base) {
    if (!names.count(base)) {
      names.insert(base);
      return base;
    }
    for (int i = 2;; ++i) {
      std::string cand = base + std::to_string(i);
      if (!names.count(cand)) {
        names.insert(cand);
        return cand;
      }
    }
  }

  std::string cast_value(const std::string& reg, Type want) {
    bool to64 = want == Type::F64;
    auto key = std::make_pair(reg, to64);
    auto it = cast_of.find(key);
    if (it != cast_of.end()) return it->second;
    std::string name = fresh_name(reg + (to64 ? ".ext" : ".trunc"));
    Instr cast;
    cast.dest = name;
    cast.op = to64 ? Opcode::FpExt : Opcode::FpTrunc;
    cast.type = to64 ? Type::F64 : Type::F32;
    cast.args.push_back(Operand::make_reg(reg));
    const DefLoc& dl = loc.at(reg);
    std::pair<int, int> anchor;
    if (dl.is_param) {
      anchor = {-1, -1};
    } else if (f.blocks[dl.block].instrs[dl.pos].op == Opcode::Phi) {
      anchor = {dl.block, -2};
    } else {
      anchor = {dl.block, dl.pos};
    }
    pending[anchor].push_back(std::move(cast));
    vtype[name] = want;
    cast_of[key] = name;
    return name;
  }

  void coerce_operand(Operand& o, Type want) {
    if (o.is_imm) return;
    std::string r = resolve(o.reg);
    Type have = vtype.at(r);
    if (have == want) {
      o.reg = r;
      return;
    }
    if (have == Type::I64 || want == Type::I64)
      throw Error("cannot coerce integer/float operand %" + r);
    o.reg = cast_value(r, want);
  }

  void coerce_all() {
    for (auto& b : f.blocks)
      for (auto& in : b.instrs) {
        switch (in.op) {
          case Opcode::FAdd:
          case Opcode::FSub:
          case Opcode::FMul:
          case Opcode::FDiv:
            coerce_operand(in.args[0], in.type);
            coerce_operand(in.args[1], in.type);
            break;
          case Opcode::FCall:
            coerce_operand(in.args[0], in.type);
            break;
          case Opcode::FCmp:
            coerce_operand(in.args[0], in.type);
            coerce_operand(in.args[1], in.type);
            break;
          case Opcode::FpExt:
            coerce_operand(in.args[0], Type::F32);
            break;
          case Opcode::FpTrunc:
            coerce_operand(in.args[0], Type::F64);
            break;
          case Opcode::Store:
            coerce_operand(in.args[2], in.type);
            break;
          case Opcode::Phi:
            if (in.type != Type::I64)
              for (auto& a : in.args) coerce_operand(a, in.type);
            break;
          case Opcode::Ret:
            if (!in.args.empty() && f.ret && *f.ret != Type::I64)
              coerce_operand(in.args[0], *f.ret);
            break;
          default:
            break;
        }
      }
  }

  void place_casts() {
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      std::vector<Instr> out;
      auto& instrs = f.blocks[b].instrs;
      size_t phi_end = 0;
      while (phi_end < instrs.size() && instrs[phi_end].op == Opcode::Phi) ++phi_end;
      for (size_t k = 0; k < instrs.size(); ++k) {
        out.push_back(std::move(instrs[k]));
        if (k + 1 == phi_end) {
          auto it = pending.find({static_cast<int>(b), -2});
          if (it != pending.end())
            for (auto& c : it->second) out.push_back(std::move(c));
        }
        auto it = pending.find({static_cast<int>(b), static_cast<int>(k)});
        if (it != pending.end())
          for (auto& c : it->second) out.push_back(std::move(c));
      }
      instrs = std::move(out);
    }
    auto it = pending.find({-1, -1});
    if (it != pending.end()) {
      auto& entry = f.blocks[0].instrs;
      entry.insert(entry.begin(), std::make_move_iterator(it->second.begin()),
                   std::make_move_iterator(it->second.end()));
    }
  }

  void run() {
    collect_defs();
    promote_types();
    // widened values can make extends redundant and retyped phis can widen
    // further values; iterate the pair to a fixpoint
    bool erased = false;
    for (;;) {
      bool c = cleanup_exts();
      bool r = retype_phis();
      erased = erased || c;
      if (!c && !r) break;
    }
    if (erased) recollect_positions();
    coerce_all();
    place_casts();
  }
};

}  // namespace

Program rewrite_program(const Program& p, const InstructionChangeSet& ics) {
  InstrIndex ix = index_program(p);
  std::map<std::string, std::set<std::string>> per_fn;
  for (const auto& id : ics.promoted) {
    auto it = ix.by_id.find(id);
    if (it == ix.by_id.end())
      throw Error("ICS references unknown instruction " + to_string(id));
    if (!is_promotable(it->second->op))
      throw Error("ICS member is not a floating operation: " + to_string(id));
    per_fn[id.function].insert(id.dest);
  }
  Program out = p;
  std::set<std::string> empty;
  for (auto& f : out.functions) {
    auto it = per_fn.find(f.name);
    FnRewriter rw(f, it == per_fn.end() ? empty : it->second);
    rw.run();
  }
  auto violations = validate_program(out);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "rewrite produced an invalid program:";
    for (const auto& v : violations) os << ' ' << to_string(v.where) << ": " << v.message << ';';
    throw Error(os.str());
  }
  return out;
}

json ics_to_json(const InstructionChangeSet& ics) {
  json arr = json::array();
  for (const auto& id : ics.promoted)
    arr.push_back(json{{"function", id.function}, {"dest", id.dest}});
  return json{{"promoted", arr}};
}

InstructionChangeSet ics_from_json(const json& j) {
  std::set<InstrId> s;
  for (const auto& e : j.at("promoted"))
    s.insert({e.at("function").get<std::string>(), e.at("dest").get<std::string>()});
  return InstructionChangeSet::from_set(s);
}

}  // namespace mixprec
