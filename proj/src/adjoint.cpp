#include "delayadm/adjoint.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "delayadm/error.hpp"
#include "delayadm/io.hpp"

namespace delayadm {

namespace {

// Interpolation stencil of the point σ = -lag on the history grid.
struct Stencil {
  int lo;
  double w_lo;
  double w_hi;
};

Stencil stencil_for(double lag, int m) {
  const double pos = (1.0 - lag) * m;
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) < 1e-9) return {static_cast<int>(rounded), 1.0, 0.0};
  const int lo = static_cast<int>(std::floor(pos));
  const double frac = pos - lo;
  return {lo, 1.0 - frac, frac};
}

void require_grid(const LiftedState& v, const DelaySystem& sys, const char* what) {
  if (v.dim() != sys.dim()) throw DimensionError(std::string(what) + ": state dimension mismatch");
  if (v.m() < 2) throw DimensionError(std::string(what) + ": need m ≥ 2");
}

}  // namespace

CVector DiscreteGenerator::reduce(const LiftedState& v) const {
  if (v.dim() != dim || v.m() != m) throw DimensionError("reduce: state is not on this grid");
  const int n = dim;
  CVector c(size());
  c.head(n) = v.head;
  if (side == Side::generator) {
    for (int j = 0; j < m; ++j) c.segment(n * (j + 1), n) = v.tail.at_node(j);
  } else {
    for (int j = 1; j < m; ++j) c.segment(n * j, n) = v.tail.at_node(j);
  }
  return c;
}

LiftedState DiscreteGenerator::expand(const CVector& c) const {
  if (c.size() != size()) throw DimensionError("expand: coordinate vector has wrong length");
  const int n = dim;
  LiftedState v(c.head(n), HistorySegment(m, n));
  if (side == Side::generator) {
    for (int j = 0; j < m; ++j) v.tail.set_node(j, c.segment(n * (j + 1), n));
    v.tail.set_node(m, v.head);
  } else {
    for (int j = 1; j < m; ++j) v.tail.set_node(j, c.segment(n * j, n));
  }
  return v;
}

cplx DiscreteGenerator::inner(const CVector& v, const CVector& w) const {
  cplx acc{};
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += metric[i] * std::conj(w(i)) * v(i);
  return acc;
}

double DiscreteGenerator::norm(const CVector& v) const { return std::sqrt(inner(v, v).real()); }

DiscreteGenerator assemble_generator(const DelaySystem& sys, const GridSpec& grid) {
  grid.validate();
  const int n = sys.dim();
  const int m = grid.m;
  if (m < 2) throw ConfigError("assemble_generator: need m ≥ 2");
  DiscreteGenerator g;
  g.side = DiscreteGenerator::Side::generator;
  g.dim = n;
  g.m = m;
  g.boundary_spec = "f(0) = x eliminated: node m fused with the head";
  const int size = n * (m + 1);
  g.matrix = CMatrix::Zero(size, size);
  const auto wt = trapezoid_weights(m);
  g.metric.assign(size, 0.0);
  for (int i = 0; i < n; ++i) g.metric[i] = 1.0 + wt[m];
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) g.metric[n * (j + 1) + i] = wt[j];
  }
  // Column block of node j; node m is the head block.
  const auto node_block = [&](int j) { return j == m ? 0 : n * (j + 1); };

  g.matrix.block(0, 0, n, n) = sys.a();
  for (const auto& d : sys.delays()) {
    const Stencil s = stencil_for(d.lag, m);
    g.matrix.block(0, node_block(s.lo), n, n) += s.w_lo * d.matrix;
    if (s.w_hi != 0.0) g.matrix.block(0, node_block(s.lo + 1), n, n) += s.w_hi * d.matrix;
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      const int row = n * (j + 1) + i;
      g.matrix(row, node_block(j + 1) + i) += static_cast<double>(m);
      g.matrix(row, node_block(j) + i) -= static_cast<double>(m);
    }
  }
  return g;
}

DiscreteGenerator assemble_adjoint(const DelaySystem& sys, const GridSpec& grid) {
  grid.validate();
  const int n = sys.dim();
  const int m = grid.m;
  if (m < 2) throw ConfigError("assemble_adjoint: need m ≥ 2");
  DiscreteGenerator g;
  g.side = DiscreteGenerator::Side::adjoint;
  g.dim = n;
  g.m = m;
  g.boundary_spec = "g(-1) = g(0) = 0 eliminated: nodes 0 and m fixed to zero";
  const int size = n * m;
  g.matrix = CMatrix::Zero(size, size);
  const auto wt = trapezoid_weights(m);
  g.metric.assign(size, 0.0);
  for (int i = 0; i < n; ++i) g.metric[i] = 1.0;
  for (int j = 1; j < m; ++j) {
    for (int i = 0; i < n; ++i) g.metric[n * j + i] = wt[j];
  }

  g.matrix.block(0, 0, n, n) = sys.a().adjoint();
  // Node j of the reduced tail lives at row block n·j (j = 1..m-1).
  for (int j = 1; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      const int row = n * j + i;
      g.matrix(row, row) -= static_cast<double>(m);
      if (j > 1) g.matrix(row, n * (j - 1) + i) += static_cast<double>(m);
    }
  }
  // Point evaluations paired through the metric: A_k* y lands on the nodes
  // of the stencil divided by their weight. Eliminated nodes drop out.
  for (const auto& d : sys.delays()) {
    const Stencil s = stencil_for(d.lag, m);
    const auto inject = [&](int node, double w) {
      if (w == 0.0 || node <= 0 || node >= m) return;
      g.matrix.block(n * node, 0, n, n) += (w / wt[node]) * d.matrix.adjoint();
    };
    inject(s.lo, s.w_lo);
    inject(s.lo + 1, s.w_hi);
  }
  return g;
}

LiftedState apply_generator(const DelaySystem& sys, const LiftedState& v) {
  require_grid(v, sys, "apply_generator");
  const int m = v.m();
  const auto node = [&](int j) -> CVector { return j == m ? CVector(v.head) : v.tail.at_node(j); };
  LiftedState out(sys.a() * v.head, HistorySegment(m, v.dim()));
  for (const auto& d : sys.delays()) {
    const Stencil s = stencil_for(d.lag, m);
    CVector f = s.w_lo * node(s.lo);
    if (s.w_hi != 0.0) f += s.w_hi * node(s.lo + 1);
    out.head += d.matrix * f;
  }
  for (int j = 0; j < m; ++j) out.tail.set_node(j, static_cast<double>(m) * (node(j + 1) - node(j)));
  out.tail.set_node(m, out.tail.at_node(m - 1));
  return out;
}

LiftedState apply_adjoint(const DelaySystem& sys, const LiftedState& w) {
  require_grid(w, sys, "apply_adjoint");
  const int m = w.m();
  const auto wt = trapezoid_weights(m);
  LiftedState out(sys.a().adjoint() * w.head, HistorySegment(m, w.dim()));
  const auto& g = w.tail;
  out.tail.set_node(0, -static_cast<double>(m) * (g.at_node(1) - g.at_node(0)));
  for (int j = 1; j <= m; ++j) {
    out.tail.set_node(j, -static_cast<double>(m) * (g.at_node(j) - g.at_node(j - 1)));
  }
  for (const auto& d : sys.delays()) {
    const Stencil s = stencil_for(d.lag, m);
    const CVector ay = d.matrix.adjoint() * w.head;
    out.tail.values().row(s.lo) += ((s.w_lo / wt[s.lo]) * ay).transpose();
    if (s.w_hi != 0.0) out.tail.values().row(s.lo + 1) += ((s.w_hi / wt[s.lo + 1]) * ay).transpose();
  }
  return out;
}

double pairing_defect_unchecked(const DelaySystem& sys, const LiftedState& v, const LiftedState& w) {
  if (v.m() != w.m() || v.dim() != w.dim()) throw DimensionError("pairing_defect: grid mismatch");
  return std::abs(inner(apply_generator(sys, v), w) - inner(v, apply_adjoint(sys, w)));
}

double pairing_defect(const DelaySystem& sys, const GridSpec& grid, const LiftedState& v,
                      const LiftedState& w, double tol) {
  if (v.m() != grid.m || w.m() != grid.m) {
    throw DimensionError("pairing_defect: states are not on the m = " + std::to_string(grid.m) +
                         " grid");
  }
  if (!is_in_domain(v, tol)) {
    throw DomainError("pairing_defect: generator argument violates f(0) = x (gap " +
                      format_double((v.tail.at_node(v.m()) - v.head).norm()) + ")");
  }
  const double scale = tol * (1.0 + lifted_norm(w));
  if (w.tail.at_node(0).norm() > scale) {
    throw DomainError("pairing_defect: adjoint argument violates g(-1) = 0 (|g(-1)| = " +
                      format_double(w.tail.at_node(0).norm()) + ")");
  }
  if (w.tail.at_node(w.m()).norm() > scale) {
    throw DomainError("pairing_defect: adjoint argument violates g(0) = 0 (|g(0)| = " +
                      format_double(w.tail.at_node(w.m()).norm()) + ")");
  }
  return pairing_defect_unchecked(sys, v, w);
}

CVector generator_eigenvalues(const DiscreteGenerator& gen) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(gen.matrix), false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("generator_eigenvalues: eigensolver failed", 0.0);
  }
  return solver.eigenvalues();
}

double rayleigh_quotient(const DiscreteGenerator& gen, const CVector& v) {
  const double nn = gen.inner(v, v).real();
  if (!(nn > 0.0)) throw DomainError("rayleigh_quotient: zero vector");
  return gen.inner(gen.matrix * v, v).real() / nn;
}

LiftedState SmoothPair::v(int m) const {
  LiftedState s(x, HistorySegment(m, static_cast<int>(x.size())));
  for (int j = 0; j <= m; ++j) {
    const double sigma = s.tail.node(j);
    s.tail.set_node(j, (sigma + 1.0) * x + sigma * (sigma + 1.0) * p);
  }
  s.tail.set_node(m, x);
  return s;
}

LiftedState SmoothPair::w(int m) const {
  LiftedState s(y, HistorySegment(m, static_cast<int>(y.size())));
  for (int j = 1; j < m; ++j) {
    const double sigma = s.tail.node(j);
    s.tail.set_node(j, sigma * (sigma + 1.0) * q);
  }
  return s;
}

SmoothPair SmoothPair::random(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto draw = [&] {
    CVector out(dim);
    for (int i = 0; i < dim; ++i) out(i) = cplx(unit(rng), unit(rng));
    return out;
  };
  SmoothPair pair;
  pair.x = draw();
  pair.p = draw();
  pair.y = draw();
  pair.q = draw();
  return pair;
}

void write_generator_csv(std::ostream& os, const DiscreteGenerator& gen) {
  write_matrix_csv(os, gen.matrix);
}

}  // namespace delayadm
