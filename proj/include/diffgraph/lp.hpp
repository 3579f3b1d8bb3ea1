#ifndef DIFFGRAPH_LP_HPP_
#define DIFFGRAPH_LP_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"

namespace diffgraph::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

enum class Status { Optimal, Infeasible, Unbounded };

/// maximize objective·x subject to rows[i]·x (sense[i]) rhs[i], x ≥ 0.
struct Problem {
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
  std::vector<Sense> sense;
  Eigen::VectorXd objective;
};

struct Solution {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

namespace detail {

/// Dense tableau with the objective kept as a separate reduced-cost row.
/// Pivoting follows Bland's rule, which rules out cycling.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd body, std::vector<Eigen::Index> basis)
      : t_(std::move(body)), basis_(std::move(basis)) {}

  Eigen::MatrixXd& data() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index rhs_col() const { return t_.cols() - 1; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      if (r == row) continue;
      const double factor = t_(r, col);
      if (factor != 0.0) {
        t_.row(r) -= factor * t_.row(row);
        t_(r, col) = 0.0;
      }
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  /// Runs the simplex over columns [0, allowed). The last tableau row holds
  /// the negated reduced costs (maximization: enter on negative entries).
  /// Returns false on unboundedness.
  bool optimize(Eigen::Index allowed, double eps) {
    const Eigen::Index obj = rows();
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index c = 0; c < allowed; ++c) {
        if (t_(obj, c) < -eps) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= eps) continue;
        const double ratio = t_(r, rhs_col()) / a;
        if (ratio < best - eps ||
            (std::abs(ratio - best) <= eps && leave >= 0 &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// Two-phase dense simplex. Adequate for a few thousand constraints.
inline Solution solve(const Problem& p, double eps = 1e-10) {
  const Eigen::Index m = p.rows.rows();
  const Eigen::Index n = p.rows.cols();
  if (p.rhs.size() != m || static_cast<Eigen::Index>(p.sense.size()) != m ||
      p.objective.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "linear program shape");
  }

  // Normalize to nonnegative right-hand sides.
  Eigen::MatrixXd a = p.rows;
  Eigen::VectorXd b = p.rhs;
  std::vector<Sense> sense = p.sense;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
      if (sense[static_cast<std::size_t>(i)] == Sense::LessEqual) {
        sense[static_cast<std::size_t>(i)] = Sense::GreaterEqual;
      } else if (sense[static_cast<std::size_t>(i)] == Sense::GreaterEqual) {
        sense[static_cast<std::size_t>(i)] = Sense::LessEqual;
      }
    }
  }

  Eigen::Index slack_count = 0;
  Eigen::Index artificial_count = 0;
  for (auto s : sense) {
    if (s != Sense::Equal) ++slack_count;
    if (s != Sense::LessEqual) ++artificial_count;
  }
  const Eigen::Index structural = n + slack_count;
  const Eigen::Index cols = structural + artificial_count;

  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  body.topLeftCorner(m, n) = a;
  body.block(0, cols, m, 1) = b;
  Eigen::Index next_slack = n;
  Eigen::Index next_art = structural;
  for (Eigen::Index i = 0; i < m; ++i) {
    switch (sense[static_cast<std::size_t>(i)]) {
      case Sense::LessEqual:
        body(i, next_slack) = 1.0;
        basis[static_cast<std::size_t>(i)] = next_slack++;
        break;
      case Sense::GreaterEqual:
        body(i, next_slack++) = -1.0;
        body(i, next_art) = 1.0;
        basis[static_cast<std::size_t>(i)] = next_art++;
        break;
      case Sense::Equal:
        body(i, next_art) = 1.0;
        basis[static_cast<std::size_t>(i)] = next_art++;
        break;
    }
  }

  detail::Tableau tab(std::move(body), std::move(basis));
  auto& t = tab.data();

  // Phase 1: maximize -Σ artificials.
  if (artificial_count > 0) {
    t.row(m).setZero();
    for (Eigen::Index c = structural; c < cols; ++c) t(m, c) = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] >= structural) t.row(m) -= t.row(i);
    }
    tab.optimize(cols, eps);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (t(m, cols) < -1e-9 * scale) return {Status::Infeasible, {}, 0.0};
    // Drive remaining artificials out of the basis.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < structural) continue;
      for (Eigen::Index c = 0; c < structural; ++c) {
        if (std::abs(t(i, c)) > 1e-9) {
          tab.pivot(i, c);
          break;
        }
      }
    }
  }

  // Phase 2 over structural columns; redundant rows keep a zero artificial.
  t.row(m).setZero();
  t.block(m, 0, 1, n) = -p.objective.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bv = tab.basis()[static_cast<std::size_t>(i)];
    if (bv < structural && t(m, bv) != 0.0) t.row(m) -= t(m, bv) * t.row(i);
  }
  if (!tab.optimize(structural, eps)) return {Status::Unbounded, {}, 0.0};

  Solution sol;
  sol.status = Status::Optimal;
  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bv = tab.basis()[static_cast<std::size_t>(i)];
    if (bv < n) sol.x[bv] = t(i, cols);
  }
  sol.objective = p.objective.dot(sol.x);
  return sol;
}

}  // namespace diffgraph::lp

#endif  // DIFFGRAPH_LP_HPP_
