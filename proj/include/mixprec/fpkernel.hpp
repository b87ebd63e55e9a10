#pragma once

// Single-operation floating point kernel: executes one op at a stated
// precision and measures the rounding error and the per-instance fault
// statistics (error ratio, addend exponent difference, cancelled bits,
// result magnitude).

#include <cstdint>
#include <optional>

#include "mixprec/nir.hpp"

namespace mixprec {

enum class FpOp : uint8_t { Add, Sub, Mul, Div, Sin, Exp, Sqrt, Fabs };

FpOp fpop_of(Opcode op, Intrinsic intr);

struct KernelConfig {
  // "length of mantissa" used by the error-ratio formula. 23/52 are the
  // stored fraction widths; tests can flip to 24/53.
  int mantissa_f32 = 23;
  int mantissa_f64 = 52;
  int mantissa(Type prec) const { return prec == Type::F32 ? mantissa_f32 : mantissa_f64; }
};

inline constexpr int kErrRatioClamp = 64;

struct FpOutcome {
  double result = 0.0;  // value of c at op precision (f32 results exactly held)
  double eps = 0.0;     // measured rounding error (see exec_fp for the method)
  // exponent of the measured rounding error; nullopt = exact (eps == 0)
  std::optional<int> eps_exponent;
  // exp(eps) + mantissa_len - exp(c), clamped to [-64, 64]; nullopt = exact
  std::optional<int> errratio_log;
  int addend_expdiff = 0;   // add/sub only, else 0
  int cancelled_bits = 0;   // effective subtraction with c != 0, else 0
  double abs_result = 0.0;  // |c| (0 when non-finite)
  bool range_fault = false; // NaN or infinity among inputs/result

  bool exact() const { return !eps_exponent.has_value() && !range_fault; }
};

// Exponent-field read: unbiased exponent of |v|, with subnormals (and zero)
// reading as the minimum normal exponent of the precision.
int exp_field(double v, Type prec);

// Quantized log error ratio per the profiling formula, clamped to +/-64.
std::optional<int> errratio_log(std::optional<int> eps_exp, int c_exp, int mantissa_len);

// Executes `op` on finite inputs at precision `prec` (b ignored for unary
// intrinsics). Non-finite inputs or outputs set range_fault and force the
// error ratio to the top bucket; the result still propagates.
FpOutcome exec_fp(FpOp op, double a, double b, Type prec, const KernelConfig& cfg = {});

// Plain results without instrumentation (the interpreter fast path). These
// are bit-identical to FpOutcome::result.
float eval_f32(FpOp op, float a, float b);
double eval_f64(FpOp op, double a, double b);

}  // namespace mixprec
