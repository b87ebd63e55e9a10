#pragma once

// The two case studies as IR programs, their input generators, host-side
// reference oracles, and accuracy metrics.

#include <cstdint>
#include <vector>

#include "mixprec/interp.hpp"
#include "mixprec/nir.hpp"

namespace mixprec {

struct MatrixInput {
  int64_t n = 100;
  uint64_t seed = 42;
  double low = -1e6;
  double high = 1e6;
};

// In-place Doolittle factorization with partial pivoting over an n x n f32
// array, dot-product form (column dots, pivot search, scale, row dots).
Program lu_program(int64_t n);
ExecInput gen_matrix(const MatrixInput& mi);

// Reference factorization in f64 with the same loop order and pivoting.
std::vector<double> host_lu(std::vector<double> a, int64_t n);

// Gauss-Legendre rule on [-1,1] via Newton on the Legendre recurrence
// (tolerance 1e-14, at most 100 iterations). Nodes ascending.
struct GLRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GLRule gauss_legendre_nodes(int n);

// Composite integration of sin(x)*exp(x) over [-10,10]: `panels` intervals
// each integrated with an order-n rule, terms accumulated from x=+10 down.
Program quad_program(int order = 20, int panels = 50);
ExecInput quad_input(int order = 20, int panels = 50);

enum class Metric { AbsError, Frobenius };

// Error versus a baseline run (normally uniform f64): Frobenius over all
// output arrays, or absolute difference of scalar returns. Computed in f64.
double accuracy(const ExecOutput& out, const ExecOutput& baseline, Metric m);

}  // namespace mixprec
