// Copyright 2026 The bamcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Box-constrained convex programs of the form
//
//   minimize    1/2 z^T P z + q^T z + sum_i w_i |m_i^T z + c_i| + const
//   subject to  lower <= z <= upper
//
// with P PSD and w >= 0. The absolute-value terms are handled through
// epigraph variables t_i >= |m_i^T z + c_i|, which turns an L1 objective into
// a linear program and leaves an L2 objective a box-constrained QP. Both are
// solved by a primal-dual interior-point method with Mehrotra
// predictor-corrector steps. The epigraph variables are eliminated from each
// Newton system, so only an n x n Cholesky factorization is required.

#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bamcts {

struct ConvexProgram {
  Eigen::MatrixXd quadratic;    // P, n x n (may be empty)
  Eigen::VectorXd linear;       // q, n (may be empty)
  Eigen::MatrixXd abs_rows;     // M, r x n (may be empty)
  Eigen::VectorXd abs_offsets;  // c, r
  Eigen::VectorXd abs_weights;  // w, r
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double constant = 0.0;

  int size() const { return static_cast<int>(lower.size()); }
  int abs_terms() const { return static_cast<int>(abs_rows.rows()); }

  double objective(const Eigen::VectorXd& z) const {
    double value = constant;
    if (quadratic.size() > 0) value += 0.5 * z.dot(quadratic * z);
    if (linear.size() > 0) value += linear.dot(z);
    if (abs_terms() > 0) {
      value += abs_weights.dot((abs_rows * z + abs_offsets).cwiseAbs());
    }
    return value;
  }

  void validate() const {
    const int n = size();
    if (n == 0) throw std::invalid_argument("program has no variables");
    if (upper.size() != n) throw std::invalid_argument("bound size mismatch");
    if ((upper.array() <= lower.array()).any()) {
      throw std::invalid_argument("every variable needs lower < upper");
    }
    if (!lower.allFinite() || !upper.allFinite()) {
      throw std::invalid_argument("bounds must be finite");
    }
    if (quadratic.size() > 0 && (quadratic.rows() != n || quadratic.cols() != n)) {
      throw std::invalid_argument("quadratic term has wrong shape");
    }
    if (linear.size() > 0 && linear.size() != n) {
      throw std::invalid_argument("linear term has wrong size");
    }
    if (abs_terms() > 0) {
      if (abs_rows.cols() != n || abs_offsets.size() != abs_terms() ||
          abs_weights.size() != abs_terms()) {
        throw std::invalid_argument("absolute-value terms have inconsistent shapes");
      }
      if ((abs_weights.array() < 0.0).any()) {
        throw std::invalid_argument("absolute-value weights must be non-negative");
      }
    }
  }
};

struct SolverOptions {
  double tolerance = 1e-9;  // relative duality gap and residuals
  int max_iterations = 100;
  // Returned instead of failing when the iteration cap is hit and the last
  // iterate meets this looser tolerance. Non-positive disables it.
  double acceptable_tolerance = 0.0;
};

struct ConvexSolution {
  Eigen::VectorXd z;
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Eigen::VectorXd best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  Eigen::VectorXd best_iterate;
};

namespace detail {

// Largest step in (0, 1] keeping v + step * dv >= 0.
inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  return step;
}

}  // namespace detail

/// Interior-point solve; throws SolverError carrying the last iterate if the
/// iteration cap is reached.
namespace detail {

/// Rescales every absolute-value row to unit infinity norm over (m_i, c_i),
/// moving the factor into its weight. The objective is unchanged.
inline ConvexProgram equilibrate(ConvexProgram prog) {
  for (int i = 0; i < prog.abs_terms(); ++i) {
    const double scale =
        std::max(prog.abs_rows.row(i).cwiseAbs().maxCoeff(), std::abs(prog.abs_offsets(i)));
    if (scale > 0.0) {
      prog.abs_rows.row(i) /= scale;
      prog.abs_offsets(i) /= scale;
      prog.abs_weights(i) *= scale;
    }
  }
  return prog;
}

}  // namespace detail

inline ConvexSolution solve_convex(const ConvexProgram& input, const SolverOptions& opts = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  input.validate();
  const ConvexProgram prog = detail::equilibrate(input);

  const int n = prog.size();
  const int r = prog.abs_terms();
  const int m = 2 * r + 2 * n;
  const bool has_p = prog.quadratic.size() > 0;
  const VectorXd q = prog.linear.size() > 0 ? prog.linear : VectorXd::Zero(n);
  const MatrixXd& mrows = prog.abs_rows;

  // Inequalities G x <= h over x = (z, t), stacked as
  //   [ M z - t <= -c ;  -M z - t <= c ;  z <= upper ;  -z <= -lower ].
  VectorXd h(m);
  if (r > 0) {
    h.segment(0, r) = -prog.abs_offsets;
    h.segment(r, r) = prog.abs_offsets;
  }
  h.segment(2 * r, n) = prog.upper;
  h.segment(2 * r + n, n) = -prog.lower;

  auto apply_g = [&](const VectorXd& z, const VectorXd& t) {
    VectorXd out(m);
    if (r > 0) {
      const VectorXd mz = mrows * z;
      out.segment(0, r) = mz - t;
      out.segment(r, r) = -mz - t;
    }
    out.segment(2 * r, n) = z;
    out.segment(2 * r + n, n) = -z;
    return out;
  };

  VectorXd z = 0.5 * (prog.lower + prog.upper);
  VectorXd t(r);
  if (r > 0) t = ((mrows * z + prog.abs_offsets).cwiseAbs().array() + 1.0).matrix();
  VectorXd s = h - apply_g(z, t);
  VectorXd lam = VectorXd::Ones(m);
  if (r > 0) {
    lam.segment(0, r) = ((0.5 * prog.abs_weights).array() + 1.0).matrix();
    lam.segment(r, r) = lam.segment(0, r);
  }

  const double h_scale = 1.0 + h.lpNorm<Eigen::Infinity>();
  double q_scale = 1.0 + q.lpNorm<Eigen::Infinity>();
  if (r > 0) q_scale = std::max(q_scale, 1.0 + prog.abs_weights.lpNorm<Eigen::Infinity>());

  auto finish = [&](const VectorXd& x, double gap, int iter) {
    ConvexSolution sol;
    sol.z = x.cwiseMax(prog.lower).cwiseMin(prog.upper);
    sol.objective = input.objective(sol.z);
    sol.duality_gap = gap;
    sol.iterations = iter;
    return sol;
  };
  std::optional<ConvexSolution> acceptable;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // Residuals.
    VectorXd rd_z = q;
    if (has_p) rd_z += prog.quadratic * z;
    VectorXd rd_t(r);
    if (r > 0) {
      rd_z += mrows.transpose() * (lam.segment(0, r) - lam.segment(r, r));
      rd_t = prog.abs_weights - lam.segment(0, r) - lam.segment(r, r);
    }
    rd_z += lam.segment(2 * r, n) - lam.segment(2 * r + n, n);
    const VectorXd rp = apply_g(z, t) + s - h;
    const double gap = s.dot(lam);
    const double mu = gap / m;

    const double pobj = prog.objective(z);
    double dres = rd_z.lpNorm<Eigen::Infinity>();
    if (r > 0) dres = std::max(dres, rd_t.lpNorm<Eigen::Infinity>());
    auto converged = [&](double tol) {
      return rp.lpNorm<Eigen::Infinity>() <= tol * h_scale && dres <= tol * q_scale &&
             gap <= tol * std::max(1.0, std::abs(pobj));
    };
    if (converged(opts.tolerance)) return finish(z, gap, iter);
    if (opts.acceptable_tolerance > 0.0 && converged(opts.acceptable_tolerance)) {
      acceptable = finish(z, gap, iter);
    }

    // Reduced Newton matrix over z with the epigraph block eliminated.
    const VectorXd d = lam.cwiseQuotient(s);
    MatrixXd kkt = has_p ? prog.quadratic : MatrixXd::Zero(n, n);
    kkt.diagonal() += d.segment(2 * r, n) + d.segment(2 * r + n, n);
    VectorXd d_sum(r), d_skew(r);
    if (r > 0) {
      const auto d1 = d.segment(0, r).array();
      const auto d2 = d.segment(r, r).array();
      d_sum = (d1 + d2).matrix();
      d_skew = (d2 - d1).matrix();
      const VectorXd w_red = (4.0 * d1 * d2 / (d1 + d2)).matrix();
      kkt.noalias() += mrows.transpose() * w_red.asDiagonal() * mrows;
    }
    // Near convergence the matrix can lose definiteness to rounding; a
    // small diagonal shift keeps the step a descent direction.
    Eigen::LLT<MatrixXd> llt(kkt);
    const double diag_scale = std::max(1.0, kkt.diagonal().cwiseAbs().maxCoeff());
    for (double shift = 1e-14 * diag_scale; llt.info() != Eigen::Success; shift *= 100.0) {
      if (shift > 1e-6 * diag_scale || !kkt.allFinite()) {
        if (acceptable) return *acceptable;
        throw SolverError("Newton system not positive definite", z);
      }
      MatrixXd shifted = kkt;
      shifted.diagonal().array() += shift;
      llt.compute(shifted);
    }

    // Solves for (dz, dt, ds, dlam) given the complementarity target rc.
    auto newton = [&](const VectorXd& rc, VectorXd& dz, VectorXd& dt, VectorXd& ds,
                      VectorXd& dl) {
      const VectorXd v = d.cwiseProduct(rp) + rc.cwiseQuotient(s);
      // b = -rd - G^T v
      VectorXd bz = -rd_z - v.segment(2 * r, n) + v.segment(2 * r + n, n);
      VectorXd bt(r);
      if (r > 0) {
        bz -= mrows.transpose() * (v.segment(0, r) - v.segment(r, r));
        bt = -rd_t + v.segment(0, r) + v.segment(r, r);
        bz -= mrows.transpose() * d_skew.cwiseQuotient(d_sum).cwiseProduct(bt);
      }
      dz = llt.solve(bz);
      if (r > 0) dt = (bt - d_skew.cwiseProduct(mrows * dz)).cwiseQuotient(d_sum);
      dl = d.cwiseProduct(apply_g(dz, dt) + rp) + rc.cwiseQuotient(s);
      ds = (rc - s.cwiseProduct(dl)).cwiseQuotient(lam);
    };

    VectorXd dz(n), dt(r), ds(m), dl(m);
    const VectorXd rc_aff = -s.cwiseProduct(lam);
    newton(rc_aff, dz, dt, ds, dl);
    const double a_aff = std::min(detail::max_step(s, ds), detail::max_step(lam, dl));
    const double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dl) / m;
    const double sigma = std::pow(mu_aff / mu, 3);

    const VectorXd rc = rc_aff - ds.cwiseProduct(dl) + VectorXd::Constant(m, sigma * mu);
    newton(rc, dz, dt, ds, dl);
    const double step =
        std::min(1.0, 0.99 * std::min(detail::max_step(s, ds), detail::max_step(lam, dl)));

    z += step * dz;
    if (r > 0) t += step * dt;
    s += step * ds;
    lam += step * dl;
    if (!z.allFinite() || !s.allFinite() || !lam.allFinite()) {
      if (acceptable) return *acceptable;
      throw SolverError("interior-point iterate became non-finite", z);
    }
  }
  if (acceptable) return *acceptable;
  throw SolverError("interior-point iteration cap reached",
                    z.cwiseMax(prog.lower).cwiseMin(prog.upper));
}

/// Plain-text dump: one block per field, "name rows cols" followed by the
/// row-major values, for cross-checking with external solvers.
inline void write_program(std::ostream& os, const ConvexProgram& prog) {
  auto block = [&os](const char* name, const Eigen::MatrixXd& mat) {
    os << name << ' ' << mat.rows() << ' ' << mat.cols() << '\n';
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        os << (j == 0 ? "" : " ") << mat(i, j);
      }
      os << '\n';
    }
  };
  os << std::setprecision(17);
  block("quadratic", prog.quadratic);
  block("linear", prog.linear);
  block("abs_rows", prog.abs_rows);
  block("abs_offsets", prog.abs_offsets);
  block("abs_weights", prog.abs_weights);
  block("lower", prog.lower);
  block("upper", prog.upper);
  os << "constant " << prog.constant << '\n';
}

}  // namespace bamcts
