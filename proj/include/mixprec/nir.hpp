#pragma once

// Numeric IR: a minimal SSA program representation with two float widths,
// declared-precision array storage, and integer index arithmetic. This is
// the unit the profiler annotates and the rewriter transforms.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixprec {

enum class Type : uint8_t { I64, F32, F64 };

enum class Opcode : uint8_t {
  FConst,
  FAdd,
  FSub,
  FMul,
  FDiv,
  FpExt,
  FpTrunc,
  FCall,
  FCmp,
  IConst,
  IAdd,
  ISub,
  IMul,
  ICmp,
  Load,
  Store,
  Idx,
  Br,
  BrCond,
  Phi,
  Ret,
};

enum class Intrinsic : uint8_t { Sin, Exp, Sqrt, Fabs };
enum class CmpPred : uint8_t { Lt, Le, Eq };

const char* opcode_name(Opcode op);
const char* intrinsic_name(Intrinsic f);
const char* cmp_pred_name(CmpPred p);
const char* type_name(Type t);

// A value operand: SSA register reference or integer immediate. Float
// immediates exist only in fconst, so they are not representable here.
struct Operand {
  bool is_imm = false;
  std::string reg;
  int64_t imm = 0;

  static Operand make_reg(std::string r) { return {false, std::move(r), 0}; }
  static Operand make_imm(int64_t v) { return {true, {}, v}; }
  bool operator==(const Operand&) const = default;
};

struct Instr {
  std::string dest;  // empty for store/br/brcond/ret
  Opcode op = Opcode::Ret;
  Type type = Type::I64;  // result/operand width where the opcode has one
  Intrinsic intr = Intrinsic::Sin;
  CmpPred pred = CmpPred::Lt;
  double fimm = 0.0;   // fconst payload (f32 constants are pre-rounded)
  int64_t iimm = 0;    // iconst payload
  std::vector<Operand> args;
  std::vector<std::string> labels;  // br/brcond targets; phi incoming labels

  bool operator==(const Instr&) const = default;
};

struct ParamType {
  bool is_array = false;
  Type elem = Type::I64;  // scalar type, or element type for arrays
  int64_t length = 0;     // arrays only

  bool operator==(const ParamType&) const = default;
};

struct Param {
  std::string name;
  ParamType type;
  bool operator==(const Param&) const = default;
};

struct Block {
  std::string label;
  std::vector<Instr> instrs;
  bool operator==(const Block&) const = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::optional<Type> ret;  // nullopt = void
  std::vector<Block> blocks;
  bool operator==(const Function&) const = default;
};

struct Program {
  std::vector<Function> functions;
  std::string entry;  // defaults to the first function parsed
  bool operator==(const Program&) const = default;
};

// Static instruction identity: (function name, destination register).
struct InstrId {
  std::string function;
  std::string dest;
  auto operator<=>(const InstrId&) const = default;
};

std::string to_string(const InstrId& id);

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_);
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Program parse_program(const std::string& source);
std::string print_program(const Program& p);

struct Violation {
  InstrId where;  // dest may be empty or an opcode marker for destless instrs
  std::string message;
};

// Empty result means the program satisfies every SSA/type invariant.
std::vector<Violation> validate_program(const Program& p);

// True iff an instruction of this opcode defines a value.
bool defines_value(Opcode op);
// True iff the defined value is floating (fconst/farith/fcall/casts/float
// load/float phi).
bool defines_float(const Instr& in);
// True iff the instruction is a profilable/promotable floating operation.
bool is_promotable(Opcode op);

// Static def-use graph over value-defining instructions of one function.
// Edge producer -> consumer per operand reference; phi incomings included;
// memory never connects stores to loads.
struct DefUseGraph {
  std::string function;
  std::vector<InstrId> nodes;
  std::map<InstrId, std::vector<InstrId>> uses;      // producer -> consumers
  std::map<InstrId, std::vector<InstrId>> operands;  // consumer -> producers
};

DefUseGraph def_use_graph(const Function& f);
// Whole-program convenience: one graph per function.
std::vector<DefUseGraph> def_use_graph(const Program& p);

// Lookup helpers used across modules.
struct InstrIndex {
  std::map<InstrId, const Instr*> by_id;
  std::map<std::string, const Function*> funcs;
};
InstrIndex index_program(const Program& p);

// FNV-1a hash of the canonical printed form, as a hex string.
std::string program_hash(const Program& p);

uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
std::string hash_hex(uint64_t h);

}  // namespace mixprec
