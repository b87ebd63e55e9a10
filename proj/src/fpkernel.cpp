#include "mixprec/fpkernel.hpp"

#include <cmath>

#include <mpfr.h>

namespace mixprec {

FpOp fpop_of(Opcode op, Intrinsic intr) {
  switch (op) {
    case Opcode::FAdd: return FpOp::Add;
    case Opcode::FSub: return FpOp::Sub;
    case Opcode::FMul: return FpOp::Mul;
    case Opcode::FDiv: return FpOp::Div;
    case Opcode::FCall:
      switch (intr) {
        case Intrinsic::Sin: return FpOp::Sin;
        case Intrinsic::Exp: return FpOp::Exp;
        case Intrinsic::Sqrt: return FpOp::Sqrt;
        case Intrinsic::Fabs: return FpOp::Fabs;
      }
      return FpOp::Fabs;
    default:
      throw Error("not a floating operation");
  }
}

int exp_field(double v, Type prec) {
  int min_exp = prec == Type::F32 ? -126 : -1022;
  v = std::fabs(v);
  if (v == 0.0 || !std::isfinite(v)) return min_exp;
  int e = std::ilogb(v);
  return e < min_exp ? min_exp : e;
}

std::optional<int> errratio_log(std::optional<int> eps_exp, int c_exp, int mantissa_len) {
  if (!eps_exp) return std::nullopt;
  long r = static_cast<long>(*eps_exp) + mantissa_len - c_exp;
  if (r > kErrRatioClamp) r = kErrRatioClamp;
  if (r < -kErrRatioClamp) r = -kErrRatioClamp;
  return static_cast<int>(r);
}

float eval_f32(FpOp op, float a, float b) {
  switch (op) {
    case FpOp::Add: return a + b;
    case FpOp::Sub: return a - b;
    case FpOp::Mul: return a * b;
    case FpOp::Div: return a / b;
    case FpOp::Sin: return static_cast<float>(std::sin(static_cast<double>(a)));
    case FpOp::Exp: return static_cast<float>(std::exp(static_cast<double>(a)));
    case FpOp::Sqrt: return std::sqrt(a);
    case FpOp::Fabs: return std::fabs(a);
  }
  return 0.0f;
}

double eval_f64(FpOp op, double a, double b) {
  switch (op) {
    case FpOp::Add: return a + b;
    case FpOp::Sub: return a - b;
    case FpOp::Mul: return a * b;
    case FpOp::Div: return a / b;
    case FpOp::Sin: return std::sin(a);
    case FpOp::Exp: return std::exp(a);
    case FpOp::Sqrt: return std::sqrt(a);
    case FpOp::Fabs: return std::fabs(a);
  }
  return 0.0;
}

namespace {

bool is_addsub(FpOp op) { return op == FpOp::Add || op == FpOp::Sub; }
bool is_unary(FpOp op) {
  return op == FpOp::Sin || op == FpOp::Exp || op == FpOp::Sqrt || op == FpOp::Fabs;
}

// Exact error of a rounded float addition (classical compensated transform).
float twosum_err(float a, float b, float s) {
  float bv = s - a;
  float av = s - bv;
  return (a - av) + (b - bv);
}

double twosum_err(double a, double b, double s) {
  double bv = s - a;
  double av = s - bv;
  return (a - av) + (b - bv);
}

// 128-bit reference for the f64 transcendentals; everything else has an
// error-free or residual-based measurement.
struct MpfrScratch {
  mpfr_t r;
  MpfrScratch() { mpfr_init2(r, 128); }
  ~MpfrScratch() { mpfr_clear(r); }
};

double mpfr_eps(FpOp op, double a, double c) {
  static thread_local MpfrScratch scratch;
  mpfr_set_d(scratch.r, a, MPFR_RNDN);
  if (op == FpOp::Sin)
    mpfr_sin(scratch.r, scratch.r, MPFR_RNDN);
  else
    mpfr_exp(scratch.r, scratch.r, MPFR_RNDN);
  mpfr_sub_d(scratch.r, scratch.r, c, MPFR_RNDN);
  return mpfr_get_d(scratch.r, MPFR_RNDN);
}

double measure_eps_f32(FpOp op, float a, float b, float c) {
  switch (op) {
    case FpOp::Add:
      return static_cast<double>(twosum_err(a, b, c));
    case FpOp::Sub:
      return static_cast<double>(twosum_err(a, -b, c));
    case FpOp::Mul:
      // 24+24 significand bits fit exactly in a double
      return static_cast<double>(a) * static_cast<double>(b) - static_cast<double>(c);
    case FpOp::Div:
      return static_cast<double>(a) / static_cast<double>(b) - static_cast<double>(c);
    case FpOp::Sin:
      return std::sin(static_cast<double>(a)) - static_cast<double>(c);
    case FpOp::Exp:
      return std::exp(static_cast<double>(a)) - static_cast<double>(c);
    case FpOp::Sqrt:
      return std::sqrt(static_cast<double>(a)) - static_cast<double>(c);
    case FpOp::Fabs:
      return 0.0;
  }
  return 0.0;
}

double measure_eps_f64(FpOp op, double a, double b, double c) {
  switch (op) {
    case FpOp::Add:
      return twosum_err(a, b, c);
    case FpOp::Sub:
      return twosum_err(a, -b, c);
    case FpOp::Mul:
      return std::fma(a, b, -c);
    case FpOp::Div:
      return std::fma(-c, b, a) / b;
    case FpOp::Sqrt:
      return c == 0.0 ? 0.0 : std::fma(-c, c, a) / (2.0 * c);
    case FpOp::Sin:
    case FpOp::Exp:
      return mpfr_eps(op, a, c);
    case FpOp::Fabs:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

FpOutcome exec_fp(FpOp op, double a, double b, Type prec, const KernelConfig& cfg) {
  FpOutcome out;
  double c, eps;
  if (prec == Type::F32) {
    float fa = static_cast<float>(a), fb = static_cast<float>(b);
    float fc = eval_f32(op, fa, fb);
    c = static_cast<double>(fc);
    bool fault = !std::isfinite(fa) || (!is_unary(op) && !std::isfinite(fb)) ||
                 !std::isfinite(fc);
    if (fault) {
      out.result = c;
      out.range_fault = true;
      out.eps_exponent = kErrRatioClamp;
      out.errratio_log = kErrRatioClamp;
      return out;
    }
    eps = measure_eps_f32(op, fa, fb, fc);
    if (is_addsub(op)) {
      out.addend_expdiff = std::abs(exp_field(a, prec) - exp_field(b, prec));
      bool eff_sub = op == FpOp::Add ? std::signbit(fa) != std::signbit(fb)
                                     : std::signbit(fa) == std::signbit(fb);
      if (eff_sub && fc != 0.0f)
        out.cancelled_bits =
            std::max(exp_field(a, prec), exp_field(b, prec)) - exp_field(c, prec);
    }
  } else {
    c = eval_f64(op, a, b);
    bool fault =
        !std::isfinite(a) || (!is_unary(op) && !std::isfinite(b)) || !std::isfinite(c);
    if (fault) {
      out.result = c;
      out.range_fault = true;
      out.eps_exponent = kErrRatioClamp;
      out.errratio_log = kErrRatioClamp;
      return out;
    }
    eps = measure_eps_f64(op, a, b, c);
    if (is_addsub(op)) {
      out.addend_expdiff = std::abs(exp_field(a, prec) - exp_field(b, prec));
      bool eff_sub = op == FpOp::Add ? std::signbit(a) != std::signbit(b)
                                     : std::signbit(a) == std::signbit(b);
      if (eff_sub && c != 0.0)
        out.cancelled_bits =
            std::max(exp_field(a, prec), exp_field(b, prec)) - exp_field(c, prec);
    }
  }
  out.result = c;
  out.eps = eps;
  out.abs_result = std::fabs(c);
  if (eps != 0.0) {
    out.eps_exponent = exp_field(eps, prec);
    if (c == 0.0) {
      // zero result with nonzero error: maximally suspicious
      out.errratio_log = kErrRatioClamp;
    } else {
      out.errratio_log = errratio_log(out.eps_exponent, exp_field(c, prec), cfg.mantissa(prec));
    }
  }
  return out;
}

}  // namespace mixprec
