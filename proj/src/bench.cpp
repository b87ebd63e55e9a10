#include "mixprec/bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixprec/rng.hpp"

namespace mixprec {

Program lu_program(int64_t n) {
  if (n < 2) throw Error("lu_program requires n >= 2");
  int64_t nn = n * n;
  std::ostringstream os;
  os << "func @lu(%A: arr<f32," << nn << ">) -> void {\n";
  os << "entry:\n  br kcond\n";
  os << "kcond:\n"
        "  %k = phi i64 [0, entry], [%k.next, kinc]\n"
        "  %kc = icmp lt %k, " << n << "\n"
        "  brcond %kc, cbody0, done\n";
  // column dots: for i in k..n-1: A[i,k] -= sum_{m<k} A[i,m]*A[m,k]
  os << "cbody0:\n  br ccond\n";
  os << "ccond:\n"
        "  %ci = phi i64 [%k, cbody0], [%ci.next, cstore]\n"
        "  %cc = icmp lt %ci, " << n << "\n"
        "  brcond %cc, cinit, pivinit\n";
  os << "cinit:\n"
        "  %cik = idx %ci, %k, " << n << "\n"
        "  %cs0 = load f32 %A, %cik\n"
        "  br cmcond\n";
  os << "cmcond:\n"
        "  %cm = phi i64 [0, cinit], [%cm.next, cmbody]\n"
        "  %cs = phi f32 [%cs0, cinit], [%cs.next, cmbody]\n"
        "  %cmc = icmp lt %cm, %k\n"
        "  brcond %cmc, cmbody, cstore\n";
  os << "cmbody:\n"
        "  %cim = idx %ci, %cm, " << n << "\n"
        "  %cx = load f32 %A, %cim\n"
        "  %cmk = idx %cm, %k, " << n << "\n"
        "  %cy = load f32 %A, %cmk\n"
        "  %cp = fmul f32 %cx, %cy\n"
        "  %cs.next = fsub f32 %cs, %cp\n"
        "  %cm.next = iadd %cm, 1\n"
        "  br cmcond\n";
  os << "cstore:\n"
        "  store f32 %A, %cik, %cs\n"
        "  %ci.next = iadd %ci, 1\n"
        "  br ccond\n";
  // pivot: argmax over |A[i,k]|, i >= k; first maximum kept
  os << "pivinit:\n"
        "  %kk = idx %k, %k, " << n << "\n"
        "  %pv0 = load f32 %A, %kk\n"
        "  %pb0 = fcall fabs f32 %pv0\n"
        "  %pi0 = iadd %k, 1\n"
        "  br pcond\n";
  os << "pcond:\n"
        "  %pi = phi i64 [%pi0, pivinit], [%pi.next, pnext]\n"
        "  %pbest = phi f32 [%pb0, pivinit], [%pbest.next, pnext]\n"
        "  %pidx = phi i64 [%k, pivinit], [%pidx.next, pnext]\n"
        "  %pc = icmp lt %pi, " << n << "\n"
        "  brcond %pc, pbody, swapchk\n";
  os << "pbody:\n"
        "  %pik = idx %pi, %k, " << n << "\n"
        "  %pv = load f32 %A, %pik\n"
        "  %pa = fcall fabs f32 %pv\n"
        "  %pgt = fcmp lt f32 %pbest, %pa\n"
        "  brcond %pgt, pupd, pskip\n";
  os << "pupd:\n  br pnext\n";
  os << "pskip:\n  br pnext\n";
  os << "pnext:\n"
        "  %pbest.next = phi f32 [%pa, pupd], [%pbest, pskip]\n"
        "  %pidx.next = phi i64 [%pi, pupd], [%pidx, pskip]\n"
        "  %pi.next = iadd %pi, 1\n"
        "  br pcond\n";
  // swap rows k and pidx when they differ
  os << "swapchk:\n"
        "  %sameq = icmp eq %pidx, %k\n"
        "  brcond %sameq, scale0, swap0\n";
  os << "swap0:\n  br swcond\n";
  os << "swcond:\n"
        "  %sj = phi i64 [0, swap0], [%sj.next, swbody]\n"
        "  %swc = icmp lt %sj, " << n << "\n"
        "  brcond %swc, swbody, scale0\n";
  os << "swbody:\n"
        "  %skj = idx %k, %sj, " << n << "\n"
        "  %spj = idx %pidx, %sj, " << n << "\n"
        "  %sv1 = load f32 %A, %skj\n"
        "  %sv2 = load f32 %A, %spj\n"
        "  store f32 %A, %skj, %sv2\n"
        "  store f32 %A, %spj, %sv1\n"
        "  %sj.next = iadd %sj, 1\n"
        "  br swcond\n";
  // scale the column below the pivot
  os << "scale0:\n"
        "  %piv = load f32 %A, %kk\n"
        "  %di0 = iadd %k, 1\n"
        "  br dcond\n";
  os << "dcond:\n"
        "  %di = phi i64 [%di0, scale0], [%di.next, dbody]\n"
        "  %dc = icmp lt %di, " << n << "\n"
        "  brcond %dc, dbody, rbody0\n";
  os << "dbody:\n"
        "  %dik = idx %di, %k, " << n << "\n"
        "  %dv = load f32 %A, %dik\n"
        "  %dl = fdiv f32 %dv, %piv\n"
        "  store f32 %A, %dik, %dl\n"
        "  %di.next = iadd %di, 1\n"
        "  br dcond\n";
  // row dots: for j in k+1..n-1: A[k,j] -= sum_{m<k} A[k,m]*A[m,j]
  os << "rbody0:\n"
        "  %rj0 = iadd %k, 1\n"
        "  br rjcond\n";
  os << "rjcond:\n"
        "  %rj = phi i64 [%rj0, rbody0], [%rj.next, rstore]\n"
        "  %rjc = icmp lt %rj, " << n << "\n"
        "  brcond %rjc, rinit, kinc\n";
  os << "rinit:\n"
        "  %rkj = idx %k, %rj, " << n << "\n"
        "  %rs0 = load f32 %A, %rkj\n"
        "  br rmcond\n";
  os << "rmcond:\n"
        "  %rm = phi i64 [0, rinit], [%rm.next, rmbody]\n"
        "  %rs = phi f32 [%rs0, rinit], [%rs.next, rmbody]\n"
        "  %rmc = icmp lt %rm, %k\n"
        "  brcond %rmc, rmbody, rstore\n";
  os << "rmbody:\n"
        "  %rkm = idx %k, %rm, " << n << "\n"
        "  %rx = load f32 %A, %rkm\n"
        "  %rmj = idx %rm, %rj, " << n << "\n"
        "  %ry = load f32 %A, %rmj\n"
        "  %rp = fmul f32 %rx, %ry\n"
        "  %rs.next = fsub f32 %rs, %rp\n"
        "  %rm.next = iadd %rm, 1\n"
        "  br rmcond\n";
  os << "rstore:\n"
        "  store f32 %A, %rkj, %rs\n"
        "  %rj.next = iadd %rj, 1\n"
        "  br rjcond\n";
  os << "kinc:\n"
        "  %k.next = iadd %k, 1\n"
        "  br kcond\n";
  os << "done:\n  ret\n}\n";
  return parse_program(os.str());
}

ExecInput gen_matrix(const MatrixInput& mi) {
  SplitMix64 rng(mi.seed);
  std::vector<double> vals(static_cast<size_t>(mi.n) * mi.n);
  for (auto& v : vals)
    v = static_cast<double>(static_cast<float>(rng.next_uniform(mi.low, mi.high)));
  ExecInput in;
  in.arrays["A"] = std::move(vals);
  return in;
}

std::vector<double> host_lu(std::vector<double> a, int64_t n) {
  auto at = [&](int64_t i, int64_t j) -> double& { return a[i * n + j]; };
  for (int64_t k = 0; k < n; ++k) {
    for (int64_t i = k; i < n; ++i) {
      double s = at(i, k);
      for (int64_t m = 0; m < k; ++m) s = s - at(i, m) * at(m, k);
      at(i, k) = s;
    }
    int64_t p = k;
    double best = std::fabs(at(k, k));
    for (int64_t i = k + 1; i < n; ++i) {
      double cand = std::fabs(at(i, k));
      if (best < cand) {
        best = cand;
        p = i;
      }
    }
    if (p != k)
      for (int64_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
    double piv = at(k, k);
    for (int64_t i = k + 1; i < n; ++i) at(i, k) = at(i, k) / piv;
    for (int64_t j = k + 1; j < n; ++j) {
      double s = at(k, j);
      for (int64_t m = 0; m < k; ++m) s = s - at(k, m) * at(m, j);
      at(k, j) = s;
    }
  }
  return a;
}

GLRule gauss_legendre_nodes(int n) {
  if (n < 2) throw Error("gauss_legendre_nodes requires n >= 2");
  GLRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // i-th root from the Chebyshev estimate, refined by Newton
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error("Legendre Newton iteration did not converge");
    // recompute dp at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // the Chebyshev estimates descend; report ascending
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  return rule;
}

Program quad_program(int order, int panels) {
  int64_t total = static_cast<int64_t>(order) * panels;
  std::ostringstream os;
  os << "func @quad(%X: arr<f32," << total << ">, %W: arr<f32," << total
     << ">) -> f32 {\n"
        "entry:\n"
        "  %zero = fconst f32 0.0\n"
        "  br loop\n"
        "loop:\n"
        "  %i = phi i64 [0, entry], [%i.next, body]\n"
        "  %acc = phi f32 [%zero, entry], [%acc.next, body]\n"
        "  %c = icmp lt %i, " << total << "\n"
        "  brcond %c, body, done\n"
        "body:\n"
        "  %x = load f32 %X, %i\n"
        "  %w = load f32 %W, %i\n"
        "  %s = fcall sin f32 %x\n"
        "  %e = fcall exp f32 %x\n"
        "  %p = fmul f32 %s, %e\n"
        "  %t = fmul f32 %w, %p\n"
        "  %acc.next = fadd f32 %acc, %t\n"
        "  %i.next = iadd %i, 1\n"
        "  br loop\n"
        "done:\n"
        "  ret %acc\n"
        "}\n";
  return parse_program(os.str());
}

ExecInput quad_input(int order, int panels) {
  GLRule rule = gauss_legendre_nodes(order);
  const double lo = -10.0, hi = 10.0;
  double h = (hi - lo) / panels;
  std::vector<double> xs, ws;
  xs.reserve(static_cast<size_t>(order) * panels);
  ws.reserve(xs.capacity());
  for (int p = 0; p < panels; ++p) {
    double c = lo + p * h + h / 2;
    double s = h / 2;
    for (int i = 0; i < order; ++i) {
      xs.push_back(c + s * rule.nodes[i]);
      ws.push_back(s * rule.weights[i]);
    }
  }
  // summed large-to-small: the big addends land first, the tail exercises
  // the absorbing additions
  std::reverse(xs.begin(), xs.end());
  std::reverse(ws.begin(), ws.end());
  for (auto& v : xs) v = static_cast<double>(static_cast<float>(v));
  for (auto& v : ws) v = static_cast<double>(static_cast<float>(v));
  ExecInput in;
  in.arrays["X"] = std::move(xs);
  in.arrays["W"] = std::move(ws);
  return in;
}

double accuracy(const ExecOutput& out, const ExecOutput& baseline, Metric m) {
  if (m == Metric::AbsError) {
    if (!out.ret || !baseline.ret) throw Error("abs error metric requires return values");
    return std::fabs(*out.ret - *baseline.ret);
  }
  double sum = 0.0;
  if (out.arrays.size() != baseline.arrays.size())
    throw Error("array sets differ between run and baseline");
  for (const auto& [name, arr] : out.arrays) {
    auto it = baseline.arrays.find(name);
    if (it == baseline.arrays.end() || it->second.data.size() != arr.data.size())
      throw Error("array shape mismatch for %" + name);
    for (size_t i = 0; i < arr.data.size(); ++i) {
      double d = arr.data[i] - it->second.data[i];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace mixprec
