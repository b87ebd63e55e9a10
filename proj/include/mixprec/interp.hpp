#pragma once

// Deterministic interpreter: executes a program at a precision assignment,
// optionally feeding every floating instruction instance into a profile sink.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mixprec/fpkernel.hpp"
#include "mixprec/nir.hpp"

namespace mixprec {

struct PrecisionAssignment {
  enum class Mode { Mixed, UniformF32, UniformF64 };
  Mode mode = Mode::Mixed;
  std::set<InstrId> promoted;  // Mixed only; empty = declared-precision run

  static PrecisionAssignment declared() { return {}; }
  static PrecisionAssignment mixed(std::set<InstrId> ics) {
    return {Mode::Mixed, std::move(ics)};
  }
  static PrecisionAssignment uniform_f32() { return {Mode::UniformF32, {}}; }
  static PrecisionAssignment uniform_f64() { return {Mode::UniformF64, {}}; }
};

struct ExecInput {
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, int64_t> int_scalars;
  std::map<std::string, double> float_scalars;
  uint64_t step_limit = 1000000000ull;
};

struct OutputArray {
  Type elem = Type::F32;  // width the run stored at
  std::vector<double> data;
  bool operator==(const OutputArray&) const = default;
};

struct ExecOutput {
  std::map<std::string, OutputArray> arrays;
  std::optional<double> ret;
  Type ret_type = Type::I64;
  uint64_t dynamic_instr_count = 0;
  std::map<std::pair<Opcode, Type>, uint64_t> op_counts;

  // canonical bit-level hash of arrays + return value
  std::string result_id() const;
};

struct ProfileSink {
  virtual ~ProfileSink() = default;
  virtual void record(const InstrId& id, Opcode op, Intrinsic intr, Type prec,
                      const FpOutcome& outcome) = 0;
};

// Executes the entry function of a validated program. Throws Error on bad
// inputs, out-of-bounds access, an exceeded step limit, or a Mixed
// assignment naming instructions the program does not declare at F64.
ExecOutput run_program(const Program& p, const ExecInput& input,
                       const PrecisionAssignment& pa = {}, ProfileSink* sink = nullptr,
                       const KernelConfig& kcfg = {});

// Input manifests: line-oriented key=value text naming arrays with a data
// file or a generator spec. Data files hold one decimal value per line.
ExecInput load_manifest(const std::string& path);
void write_manifest(const std::string& path, const ExecInput& input,
                    const std::map<std::string, Type>& elem_types);

std::vector<double> load_data_file(const std::string& path);
void write_data_file(const std::string& path, const std::vector<double>& values, Type elem);

}  // namespace mixprec
