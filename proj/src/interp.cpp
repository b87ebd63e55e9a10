#include "mixprec/interp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixprec/rng.hpp"

namespace mixprec {

namespace {

union Value {
  int64_t i;
  float f;
  double d;
};

struct ArrBuf {
  Type elem = Type::F32;
  std::vector<float> f;
  std::vector<double> d;
  size_t size() const { return elem == Type::F64 ? d.size() : f.size(); }
};

struct PInstr {
  Opcode op;
  Type ty = Type::I64;  // executed width where relevant
  FpOp fop = FpOp::Add;
  Intrinsic intr = Intrinsic::Sin;
  CmpPred pred = CmpPred::Lt;
  int dest = -1;
  int a0 = -1, a1 = -1, a2 = -1;
  int arr = -1;
  int b0 = -1, b1 = -1;  // branch targets (block ids)
  double fimm = 0.0;
  int64_t iimm = 0;
  int id_ix = -1;
};

struct EdgeCopies {
  std::vector<std::pair<int, int>> moves;  // dest slot <- src slot (parallel)
  uint64_t phi_count = 0;                  // number of phi instrs this edge feeds
};

struct BlockRange {
  size_t begin = 0, end = 0;
  std::map<int, EdgeCopies> out_edges;  // by target block id
};

struct Plan {
  std::vector<PInstr> code;
  std::vector<BlockRange> blocks;
  std::vector<InstrId> ids;
  std::vector<Value> init_slots;  // preloaded const slots, zeros elsewhere
  std::map<std::string, int> slot_of;
  std::vector<Type> slot_type;
  std::vector<std::pair<Opcode, Type>> count_key;  // per pinstr
};

Type exec_width(Type declared, const PrecisionAssignment& pa) {
  if (declared == Type::I64) return Type::I64;
  switch (pa.mode) {
    case PrecisionAssignment::Mode::UniformF32: return Type::F32;
    case PrecisionAssignment::Mode::UniformF64: return Type::F64;
    default: return declared;
  }
}

[[noreturn]] void fail_at(const InstrId& id, const std::string& msg) {
  throw Error(msg + " at " + to_string(id));
}

Plan compile_entry(const Function& f, const PrecisionAssignment& pa) {
  Plan pl;
  auto new_slot = [&](const std::string& name, Type t) {
    int s = static_cast<int>(pl.slot_type.size());
    pl.slot_of[name] = s;
    pl.slot_type.push_back(t);
    return s;
  };
  // params
  for (const auto& prm : f.params)
    if (!prm.type.is_array) new_slot(prm.name, exec_width(prm.type.elem, pa));
  // array name -> buffer index
  std::map<std::string, int> arr_ix;
  for (const auto& prm : f.params)
    if (prm.type.is_array) {
      int ix = static_cast<int>(arr_ix.size());
      arr_ix[prm.name] = ix;
    }
  // defs
  std::map<std::string, int> block_ix;
  for (size_t i = 0; i < f.blocks.size(); ++i) block_ix[f.blocks[i].label] = static_cast<int>(i);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (defines_value(in.op)) {
        Type t;
        switch (in.op) {
          case Opcode::FpExt: t = exec_width(Type::F64, pa); break;
          case Opcode::FpTrunc: t = exec_width(Type::F32, pa); break;
          case Opcode::FConst:
          case Opcode::FAdd:
          case Opcode::FSub:
          case Opcode::FMul:
          case Opcode::FDiv:
          case Opcode::FCall:
          case Opcode::Load:
          case Opcode::Phi:
            t = exec_width(in.type, pa);
            break;
          default: t = Type::I64;
        }
        new_slot(in.dest, t);
      }
  // immediate pool
  std::map<int64_t, int> imm_slot;
  std::vector<Value> init(pl.slot_type.size());
  for (auto& v : init) v.i = 0;
  auto slot_for = [&](const Operand& o) {
    if (!o.is_imm) return pl.slot_of.at(o.reg);
    auto it = imm_slot.find(o.imm);
    if (it != imm_slot.end()) return it->second;
    int s = static_cast<int>(pl.slot_type.size());
    pl.slot_type.push_back(Type::I64);
    Value v;
    v.i = o.imm;
    init.push_back(v);
    imm_slot[o.imm] = s;
    return s;
  };

  pl.blocks.resize(f.blocks.size());
  for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const Block& b = f.blocks[bi];
    pl.blocks[bi].begin = pl.code.size();
    for (const auto& in : b.instrs) {
      if (in.op == Opcode::Phi) continue;  // handled on edges
      PInstr pi;
      pi.op = in.op;
      pi.pred = in.pred;
      pi.intr = in.intr;
      pi.id_ix = static_cast<int>(pl.ids.size());
      pl.ids.push_back({f.name, in.dest});
      if (defines_value(in.op)) pi.dest = pl.slot_of.at(in.dest);
      switch (in.op) {
        case Opcode::FConst:
          pi.ty = exec_width(in.type, pa);
          pi.fimm = pi.ty == Type::F32 ? static_cast<double>(static_cast<float>(in.fimm))
                                       : in.fimm;
          break;
        case Opcode::IConst:
          pi.iimm = in.iimm;
          break;
        case Opcode::FAdd:
        case Opcode::FSub:
        case Opcode::FMul:
        case Opcode::FDiv:
          pi.ty = exec_width(in.type, pa);
          pi.fop = fpop_of(in.op, in.intr);
          pi.a0 = slot_for(in.args[0]);
          pi.a1 = slot_for(in.args[1]);
          break;
        case Opcode::FCall:
          pi.ty = exec_width(in.type, pa);
          pi.fop = fpop_of(in.op, in.intr);
          pi.a0 = slot_for(in.args[0]);
          break;
        case Opcode::FCmp:
          pi.ty = exec_width(in.type, pa);
          pi.a0 = slot_for(in.args[0]);
          pi.a1 = slot_for(in.args[1]);
          break;
        case Opcode::FpExt:
        case Opcode::FpTrunc:
          pi.ty = pl.slot_type[pi.dest];
          pi.a0 = slot_for(in.args[0]);
          break;
        case Opcode::IAdd:
        case Opcode::ISub:
        case Opcode::IMul:
        case Opcode::ICmp:
          pi.a0 = slot_for(in.args[0]);
          pi.a1 = slot_for(in.args[1]);
          break;
        case Opcode::Idx:
          pi.a0 = slot_for(in.args[0]);
          pi.a1 = slot_for(in.args[1]);
          pi.a2 = slot_for(in.args[2]);
          break;
        case Opcode::Load:
          pi.ty = exec_width(in.type, pa);
          pi.arr = arr_ix.at(in.args[0].reg);
          pi.a0 = slot_for(in.args[1]);
          break;
        case Opcode::Store:
          pi.ty = exec_width(in.type, pa);
          pi.arr = arr_ix.at(in.args[0].reg);
          pi.a0 = slot_for(in.args[1]);
          pi.a1 = slot_for(in.args[2]);
          break;
        case Opcode::Br:
          pi.b0 = block_ix.at(in.labels[0]);
          break;
        case Opcode::BrCond:
          pi.a0 = slot_for(in.args[0]);
          pi.b0 = block_ix.at(in.labels[0]);
          pi.b1 = block_ix.at(in.labels[1]);
          break;
        case Opcode::Ret:
          if (!in.args.empty()) pi.a0 = slot_for(in.args[0]);
          break;
        case Opcode::Phi:
          break;
      }
      pl.code.push_back(pi);
    }
    pl.blocks[bi].end = pl.code.size();
  }
  // edge phi copies
  for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const Block& b = f.blocks[bi];
    for (const auto& in : b.instrs) {
      if (in.op != Opcode::Phi) break;
      int dst = pl.slot_of.at(in.dest);
      for (size_t a = 0; a < in.args.size(); ++a) {
        int from = block_ix.at(in.labels[a]);
        auto& e = pl.blocks[from].out_edges[static_cast<int>(bi)];
        e.moves.emplace_back(dst, slot_for(in.args[a]));
        e.phi_count += 1;
      }
    }
  }
  pl.init_slots = std::move(init);
  for (const auto& pi : pl.code) {
    Type ct = Type::I64;
    switch (pi.op) {
      case Opcode::FConst:
      case Opcode::FAdd:
      case Opcode::FSub:
      case Opcode::FMul:
      case Opcode::FDiv:
      case Opcode::FCall:
      case Opcode::FCmp:
      case Opcode::Load:
      case Opcode::Store:
        ct = pi.ty;
        break;
      case Opcode::FpExt:
      case Opcode::FpTrunc:
        ct = pi.ty;
        break;
      default:
        ct = Type::I64;
    }
    pl.count_key.emplace_back(pi.op, ct);
  }
  return pl;
}

}  // namespace

std::string ExecOutput::result_id() const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const void* p, size_t n) { h = fnv1a(p, n, h); };
  for (const auto& [name, arr] : arrays) {
    mix(name.data(), name.size());
    uint8_t tag = static_cast<uint8_t>(arr.elem);
    mix(&tag, 1);
    for (double v : arr.data) {
      if (arr.elem == Type::F32) {
        float fv = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &fv, 4);
        mix(&bits, 4);
      } else {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        mix(&bits, 8);
      }
    }
  }
  uint8_t has_ret = ret.has_value() ? 1 : 0;
  mix(&has_ret, 1);
  if (ret) {
    uint8_t tag = static_cast<uint8_t>(ret_type);
    mix(&tag, 1);
    if (ret_type == Type::F32) {
      float fv = static_cast<float>(*ret);
      uint32_t bits;
      std::memcpy(&bits, &fv, 4);
      mix(&bits, 4);
    } else if (ret_type == Type::F64) {
      uint64_t bits;
      std::memcpy(&bits, &*ret, 8);
      mix(&bits, 8);
    } else {
      int64_t iv = static_cast<int64_t>(*ret);
      mix(&iv, 8);
    }
  }
  return hash_hex(h);
}

ExecOutput run_program(const Program& p, const ExecInput& input,
                       const PrecisionAssignment& pa, ProfileSink* sink,
                       const KernelConfig& kcfg) {
  InstrIndex ix = index_program(p);
  auto fit = ix.funcs.find(p.entry);
  if (fit == ix.funcs.end()) throw Error("entry function @" + p.entry + " not found");
  const Function& f = *fit->second;

  if (pa.mode == PrecisionAssignment::Mode::Mixed) {
    for (const auto& id : pa.promoted) {
      auto iit = ix.by_id.find(id);
      if (iit == ix.by_id.end()) fail_at(id, "promoted instruction does not exist");
      const Instr& in = *iit->second;
      if (!is_promotable(in.op)) fail_at(id, "promoted instruction is not a floating op");
      if (in.type != Type::F64)
        fail_at(id, "promoted instruction still declared f32 (program not rewritten: missing casts)");
    }
  }

  Plan pl = compile_entry(f, pa);

  // bind arrays
  std::vector<ArrBuf> arrs;
  std::vector<std::string> arr_names;
  for (const auto& prm : f.params) {
    if (!prm.type.is_array) continue;
    auto it = input.arrays.find(prm.name);
    if (it == input.arrays.end())
      throw Error("unbound array parameter %" + prm.name + " of @" + f.name);
    if (static_cast<int64_t>(it->second.size()) != prm.type.length)
      throw Error("array %" + prm.name + " length mismatch: declared " +
                  std::to_string(prm.type.length) + ", bound " +
                  std::to_string(it->second.size()));
    ArrBuf buf;
    buf.elem = exec_width(prm.type.elem, pa);
    if (buf.elem == Type::F64) {
      buf.d.reserve(it->second.size());
      for (double v : it->second) buf.d.push_back(v);
    } else {
      buf.f.reserve(it->second.size());
      for (double v : it->second) buf.f.push_back(static_cast<float>(v));
    }
    arrs.push_back(std::move(buf));
    arr_names.push_back(prm.name);
  }
  // bind scalars
  std::vector<Value> slots = pl.init_slots;
  for (const auto& prm : f.params) {
    if (prm.type.is_array) continue;
    int s = pl.slot_of.at(prm.name);
    if (prm.type.elem == Type::I64) {
      auto it = input.int_scalars.find(prm.name);
      if (it == input.int_scalars.end())
        throw Error("unbound i64 parameter %" + prm.name);
      slots[s].i = it->second;
    } else {
      auto it = input.float_scalars.find(prm.name);
      if (it == input.float_scalars.end())
        throw Error("unbound float parameter %" + prm.name);
      if (pl.slot_type[s] == Type::F32)
        slots[s].f = static_cast<float>(it->second);
      else
        slots[s].d = it->second;
    }
  }

  std::vector<uint64_t> exec_count(pl.code.size(), 0);
  uint64_t phi_dyn = 0;
  uint64_t steps = 0;
  const uint64_t limit = input.step_limit;

  ExecOutput out;
  auto finish_counts = [&]() {
    out.dynamic_instr_count = steps;
    for (size_t i = 0; i < pl.code.size(); ++i) {
      if (!exec_count[i]) continue;
      out.op_counts[pl.count_key[i]] += exec_count[i];
    }
    if (phi_dyn) out.op_counts[{Opcode::Phi, Type::I64}] += phi_dyn;
  };

  size_t pc = pl.blocks[0].begin;
  int cur = 0;
  std::vector<double> phi_tmp;
  bool done = false;
  while (!done) {
    if (pc >= pl.blocks[cur].end) throw Error("fell off block end in @" + f.name);
    const PInstr& pi = pl.code[pc];
    if (++steps > limit) {
      finish_counts();
      throw Error("step limit " + std::to_string(limit) + " exceeded at " +
                  to_string(pl.ids[pi.id_ix]) + " (" +
                  std::to_string(steps - 1) + " instructions executed)");
    }
    ++exec_count[pc];

    auto take_edge = [&](int target) {
      auto& e = pl.blocks[cur].out_edges[target];
      if (!e.moves.empty()) {
        phi_tmp.clear();
        for (auto& mv : e.moves) {
          int src = mv.second;
          // snapshot sources as raw bits via double-width read
          Value v = slots[src];
          phi_tmp.push_back(0);
          std::memcpy(&phi_tmp.back(), &v, sizeof v);
        }
        // validated phis always match their incoming widths, so the
        // parallel copy moves raw values
        for (size_t k = 0; k < e.moves.size(); ++k) {
          Value v;
          std::memcpy(&v, &phi_tmp[k], sizeof v);
          slots[e.moves[k].first] = v;
        }
        phi_dyn += e.phi_count;
        steps += e.phi_count;
      }
      cur = target;
      pc = pl.blocks[target].begin;
    };

    switch (pi.op) {
      case Opcode::FConst:
        if (pi.ty == Type::F32)
          slots[pi.dest].f = static_cast<float>(pi.fimm);
        else
          slots[pi.dest].d = pi.fimm;
        ++pc;
        break;
      case Opcode::IConst:
        slots[pi.dest].i = pi.iimm;
        ++pc;
        break;
      case Opcode::FAdd:
      case Opcode::FSub:
      case Opcode::FMul:
      case Opcode::FDiv:
      case Opcode::FCall: {
        bool unary = pi.op == Opcode::FCall;
        if (pi.ty == Type::F32) {
          float a = slots[pi.a0].f;
          float b = unary ? 0.0f : slots[pi.a1].f;
          if (sink) {
            FpOutcome o = exec_fp(pi.fop, a, b, Type::F32, kcfg);
            sink->record(pl.ids[pi.id_ix], pi.op, pi.intr, Type::F32, o);
            slots[pi.dest].f = static_cast<float>(o.result);
          } else {
            slots[pi.dest].f = eval_f32(pi.fop, a, b);
          }
        } else {
          double a = slots[pi.a0].d;
          double b = unary ? 0.0 : slots[pi.a1].d;
          if (sink) {
            FpOutcome o = exec_fp(pi.fop, a, b, Type::F64, kcfg);
            sink->record(pl.ids[pi.id_ix], pi.op, pi.intr, Type::F64, o);
            slots[pi.dest].d = o.result;
          } else {
            slots[pi.dest].d = eval_f64(pi.fop, a, b);
          }
        }
        ++pc;
        break;
      }
      case Opcode::FCmp: {
        double a, b;
        if (pi.ty == Type::F32) {
          a = slots[pi.a0].f;
          b = slots[pi.a1].f;
        } else {
          a = slots[pi.a0].d;
          b = slots[pi.a1].d;
        }
        bool r = pi.pred == CmpPred::Lt ? a < b : pi.pred == CmpPred::Le ? a <= b : a == b;
        slots[pi.dest].i = r ? 1 : 0;
        ++pc;
        break;
      }
      case Opcode::FpExt: {
        // identity copy in uniform modes
        if (pl.slot_type[pi.a0] == Type::F32)
          slots[pi.dest].d = static_cast<double>(slots[pi.a0].f);
        else if (pi.ty == Type::F32)
          slots[pi.dest].f = slots[pi.a0].f;
        else
          slots[pi.dest].d = slots[pi.a0].d;
        ++pc;
        break;
      }
      case Opcode::FpTrunc: {
        if (pl.slot_type[pi.a0] == Type::F64 && pi.ty == Type::F32)
          slots[pi.dest].f = static_cast<float>(slots[pi.a0].d);
        else if (pi.ty == Type::F32)
          slots[pi.dest].f = slots[pi.a0].f;
        else
          slots[pi.dest].d = slots[pi.a0].d;
        ++pc;
        break;
      }
      case Opcode::IAdd:
        slots[pi.dest].i = static_cast<int64_t>(static_cast<uint64_t>(slots[pi.a0].i) +
                                                static_cast<uint64_t>(slots[pi.a1].i));
        ++pc;
        break;
      case Opcode::ISub:
        slots[pi.dest].i = static_cast<int64_t>(static_cast<uint64_t>(slots[pi.a0].i) -
                                                static_cast<uint64_t>(slots[pi.a1].i));
        ++pc;
        break;
      case Opcode::IMul:
        slots[pi.dest].i = static_cast<int64_t>(static_cast<uint64_t>(slots[pi.a0].i) *
                                                static_cast<uint64_t>(slots[pi.a1].i));
        ++pc;
        break;
      case Opcode::ICmp: {
        int64_t a = slots[pi.a0].i, b = slots[pi.a1].i;
        bool r = pi.pred == CmpPred::Lt ? a < b : pi.pred == CmpPred::Le ? a <= b : a == b;
        slots[pi.dest].i = r ? 1 : 0;
        ++pc;
        break;
      }
      case Opcode::Idx: {
        uint64_t i = static_cast<uint64_t>(slots[pi.a0].i);
        uint64_t j = static_cast<uint64_t>(slots[pi.a1].i);
        uint64_t n = static_cast<uint64_t>(slots[pi.a2].i);
        slots[pi.dest].i = static_cast<int64_t>(i * n + j);
        ++pc;
        break;
      }
      case Opcode::Load: {
        ArrBuf& ab = arrs[pi.arr];
        int64_t ixv = slots[pi.a0].i;
        if (ixv < 0 || static_cast<size_t>(ixv) >= ab.size()) {
          finish_counts();
          fail_at(pl.ids[pi.id_ix], "index " + std::to_string(ixv) + " out of bounds");
        }
        if (ab.elem == Type::F64)
          slots[pi.dest].d = ab.d[ixv];
        else
          slots[pi.dest].f = ab.f[ixv];
        ++pc;
        break;
      }
      case Opcode::Store: {
        ArrBuf& ab = arrs[pi.arr];
        int64_t ixv = slots[pi.a0].i;
        if (ixv < 0 || static_cast<size_t>(ixv) >= ab.size()) {
          finish_counts();
          fail_at(pl.ids[pi.id_ix], "index " + std::to_string(ixv) + " out of bounds");
        }
        if (ab.elem == Type::F64)
          ab.d[ixv] = slots[pi.a1].d;
        else
          ab.f[ixv] = slots[pi.a1].f;
        ++pc;
        break;
      }
      case Opcode::Br:
        take_edge(pi.b0);
        break;
      case Opcode::BrCond:
        take_edge(slots[pi.a0].i != 0 ? pi.b0 : pi.b1);
        break;
      case Opcode::Ret: {
        if (pi.a0 >= 0) {
          Type rt = pl.slot_type[pi.a0];
          out.ret_type = rt;
          if (rt == Type::F32)
            out.ret = static_cast<double>(slots[pi.a0].f);
          else if (rt == Type::F64)
            out.ret = slots[pi.a0].d;
          else
            out.ret = static_cast<double>(slots[pi.a0].i);
        }
        done = true;
        break;
      }
      case Opcode::Phi:
        throw Error("phi reached in instruction stream");
    }
  }

  finish_counts();
  for (size_t i = 0; i < arrs.size(); ++i) {
    OutputArray oa;
    oa.elem = arrs[i].elem;
    if (arrs[i].elem == Type::F64)
      oa.data = arrs[i].d;
    else {
      oa.data.reserve(arrs[i].f.size());
      for (float v : arrs[i].f) oa.data.push_back(static_cast<double>(v));
    }
    out.arrays[arr_names[i]] = std::move(oa);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::vector<double> load_data_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    out.push_back(std::strtod(line.c_str() + a, nullptr));
  }
  return out;
}

void write_data_file(const std::string& path, const std::vector<double>& values, Type elem) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write data file " + path);
  char buf[64];
  for (double v : values) {
    if (elem == Type::F32)
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
    else
      std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

ExecInput load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  ExecInput input;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::map<std::string, std::string> kv;
    std::string tok;
    bool comment = false;
    while (ls >> tok) {
      if (tok[0] == '#' || tok.rfind("//", 0) == 0) {
        comment = true;
        break;
      }
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw Error("manifest " + path + ":" + std::to_string(lineno) +
                    ": expected key=value, got '" + tok + "'");
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    (void)comment;
    if (kv.empty()) continue;
    if (kv.count("array")) {
      std::string name = kv.at("array");
      size_t length = kv.count("length") ? std::stoull(kv.at("length")) : 0;
      std::vector<double> vals;
      if (kv.count("file")) {
        vals = load_data_file((dir / kv.at("file")).string());
      } else if (kv.count("gen")) {
        if (kv.at("gen") != "uniform")
          throw Error("manifest: unknown generator '" + kv.at("gen") + "'");
        double lo = std::stod(kv.at("low"));
        double hi = std::stod(kv.at("high"));
        uint64_t seed = std::stoull(kv.at("seed"));
        SplitMix64 rng(seed);
        vals.resize(length);
        for (auto& v : vals) v = rng.next_uniform(lo, hi);
      } else {
        throw Error("manifest: array " + name + " needs file= or gen=");
      }
      if (length && vals.size() != length)
        throw Error("manifest: array " + name + " has " + std::to_string(vals.size()) +
                    " values, expected " + std::to_string(length));
      if (kv.count("elem") && kv.at("elem") == "f32")
        for (auto& v : vals) v = static_cast<double>(static_cast<float>(v));
      input.arrays[name] = std::move(vals);
    } else if (kv.count("scalar")) {
      std::string name = kv.at("scalar");
      std::string ty = kv.count("type") ? kv.at("type") : "i64";
      if (ty == "i64")
        input.int_scalars[name] = std::stoll(kv.at("value"));
      else
        input.float_scalars[name] = std::stod(kv.at("value"));
    } else if (kv.count("step_limit")) {
      input.step_limit = std::stoull(kv.at("step_limit"));
    } else {
      throw Error("manifest " + path + ":" + std::to_string(lineno) + ": unknown entry");
    }
  }
  return input;
}

void write_manifest(const std::string& path, const ExecInput& input,
                    const std::map<std::string, Type>& elem_types) {
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  for (const auto& [name, vals] : input.arrays) {
    Type elem = elem_types.count(name) ? elem_types.at(name) : Type::F32;
    std::string fname = name + ".data";
    write_data_file((dir / fname).string(), vals, elem);
    out << "array=" << name << " elem=" << type_name(elem) << " length=" << vals.size()
        << " file=" << fname << '\n';
  }
  for (const auto& [name, v] : input.int_scalars)
    out << "scalar=" << name << " type=i64 value=" << v << '\n';
  char buf[64];
  for (const auto& [name, v] : input.float_scalars) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << "scalar=" << name << " type=f64 value=" << buf << '\n';
  }
  if (input.step_limit != ExecInput{}.step_limit)
    out << "step_limit=" << input.step_limit << '\n';
}

}  // namespace mixprec
