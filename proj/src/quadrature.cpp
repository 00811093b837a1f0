#include "fmto/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include <fmt/format.h>

#include "fmto/error.hpp"

namespace fmto {

namespace {

// Kronrod nodes (positive half, last is 0) and weights; Gauss weights on
// the odd Kronrod nodes.
constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * wk[7];
  double rg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xk[static_cast<std::size_t>(j)];
    const double s = f(c - dx) + f(c + dx);
    rk += wk[static_cast<std::size_t>(j)] * s;
    if (j % 2 == 1) rg += wg[static_cast<std::size_t>(j / 2)] * s;
  }
  const double value = rk * h;
  const double error = std::abs((rk - rg) * h);
  if (!std::isfinite(value)) throw NumericalError("integrand is not finite");
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& o) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integration limits must be finite");
  if (!(o.rel_tol > 0.0 || o.abs_tol > 0.0)) throw DomainError("need a positive tolerance");
  if (a == b) return {0.0, 0.0, 0, 0};
  if (b < a) {
    auto r = integrate(f, b, a, o);
    r.value = -r.value;
    return r;
  }

  std::priority_queue<Piece> heap;
  heap.push(gk15(f, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  int evaluations = 15;
  while (error > std::max(o.abs_tol, o.rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= o.max_intervals)
      throw NumericalError(fmt::format(
          "quadrature on [{}, {}] did not converge: {} intervals, value {}, error {}", a, b,
          heap.size(), total, error));
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw NumericalError(fmt::format(
          "quadrature on [{}, {}]: interval cannot be split further near {}", a, b, mid));
    const Piece left = gk15(f, worst.a, mid);
    const Piece right = gk15(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the running totals.
  double value = 0.0;
  double err = 0.0;
  const int intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {value, err, intervals, evaluations};
}

}  // namespace fmto
