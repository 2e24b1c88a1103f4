// Copyright 2026 The uvms-id Authors
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

#include "uvms/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace uvms {

MatX PsdBlock::evaluate(const VecX& x) const {
  MatX s = offset;
  for (const auto& [index, basis] : terms) s += x[index] * basis;
  return s;
}

void ConicProblem::validate() {
  const int n = dimension();
  if (n == 0) throw std::invalid_argument("problem has no variables");
  if (!((q.array() > 0.0).all() && q.allFinite())) {
    throw std::invalid_argument("increment weights must be positive and finite");
  }
  if (x_ref.size() == 0) x_ref = VecX::Zero(n);
  if (x_ref.size() != n) throw std::invalid_argument("x_ref has the wrong dimension");
  if (residual_matrix.size() == 0) residual_matrix.resize(0, n);
  if (residual_matrix.cols() != n || residual_offset.size() != residual_matrix.rows()) {
    throw std::invalid_argument("residual matrix and offset dimensions disagree");
  }
  int next = 0;
  for (const ResidualBlock& b : huber_blocks) {
    if (b.row_begin != next || b.row_count <= 0) {
      throw std::invalid_argument("Huber blocks must partition the residual rows in order");
    }
    if (!(b.rho > 0.0)) throw std::invalid_argument("Huber threshold must be > 0");
    next += b.row_count;
  }
  if (next != residual_matrix.rows()) {
    throw std::invalid_argument("Huber blocks do not cover every residual row");
  }
  if (eq_matrix.size() == 0) eq_matrix.resize(0, n);
  if (eq_matrix.cols() != n || eq_rhs.size() != eq_matrix.rows()) {
    throw std::invalid_argument("equality dimensions disagree");
  }
  if (lower.size() == 0) lower = VecX::Constant(n, -std::numeric_limits<double>::infinity());
  if (upper.size() == 0) upper = VecX::Constant(n, std::numeric_limits<double>::infinity());
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("bound dimensions");
  for (const PsdBlock& b : psd_blocks) {
    if (b.offset.rows() != b.offset.cols() || b.offset.rows() == 0) {
      throw std::invalid_argument("PSD block offset must be square");
    }
    for (const auto& [index, basis] : b.terms) {
      if (index < 0 || index >= n || basis.rows() != b.size() || basis.cols() != b.size()) {
        throw std::invalid_argument("PSD block term out of range");
      }
    }
  }
  if (anchor.size() == 0) anchor = x_ref;
  if (anchor.size() != n) throw std::invalid_argument("anchor has the wrong dimension");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kMaxIterations: return "max_iters";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

double huber_value(const VecX& v, double rho) {
  const double r = v.norm();
  if (r <= rho) return r * r;
  return 2.0 * rho * r - rho * rho;
}

VecX prox_huber(const VecX& z, double rho, double step) {
  const double r = z.norm();
  if (!std::isfinite(rho) || r <= rho * (1.0 + 2.0 * step)) return z / (1.0 + 2.0 * step);
  return z * (1.0 - 2.0 * rho * step / r);
}

MatX project_psd(const MatX& s, double margin) {
  const MatX sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> es(sym);
  const VecX& lambda = es.eigenvalues();
  if (lambda.minCoeff() >= margin) return sym;
  const VecX clipped = lambda.cwiseMax(margin);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

double objective(const ConicProblem& problem, const VecX& x) {
  double f = (problem.q.array() * (x - problem.x_ref).array().square()).sum();
  if (problem.residual_matrix.rows() > 0) {
    const VecX v = problem.residual_matrix * x - problem.residual_offset;
    for (const ResidualBlock& b : problem.huber_blocks) {
      f += huber_value(v.segment(b.row_begin, b.row_count), b.rho);
    }
  }
  return f;
}

double constraint_violation(const ConicProblem& problem, const VecX& x) {
  double worst = 0.0;
  if (problem.eq_matrix.rows() > 0) {
    worst = (problem.eq_matrix * x - problem.eq_rhs).cwiseAbs().maxCoeff();
  }
  for (int i = 0; i < x.size(); ++i) {
    if (problem.lower.size() > 0) worst = std::max(worst, problem.lower[i] - x[i]);
    if (problem.upper.size() > 0) worst = std::max(worst, x[i] - problem.upper[i]);
  }
  for (const PsdBlock& b : problem.psd_blocks) {
    Eigen::SelfAdjointEigenSolver<MatX> es(b.evaluate(x), Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues()[0]);
  }
  return worst;
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

int svec_size(int p) { return p * (p + 1) / 2; }

VecX svec(const MatX& s) {
  const int p = static_cast<int>(s.rows());
  VecX v(svec_size(p));
  int k = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) v[k++] = i == j ? s(i, j) : kSqrt2 * 0.5 * (s(i, j) + s(j, i));
  }
  return v;
}

MatX smat(const Eigen::Ref<const VecX>& v, int p) {
  MatX s(p, p);
  int k = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) {
      const double value = i == j ? v[k] : v[k] / kSqrt2;
      s(i, j) = value;
      s(j, i) = value;
      ++k;
    }
  }
  return s;
}

double min_eig(const MatX& s) {
  Eigen::SelfAdjointEigenSolver<MatX> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double inf_norm(const VecX& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Rows of the constraint map s = A x + c, with their scaled representation
/// s' = weight * (s - shift).
struct ConstraintRows {
  MatX a;
  VecX c;
  VecX weight;
  VecX shift;
  int residual_rows = 0;
  std::vector<int> box_index;
  VecX box_lo, box_hi;  // in scaled units
  struct Cone {
    int row;
    int size;
    double margin;  // in scaled units
  };
  std::vector<Cone> cones;
};

ConstraintRows build_rows(const ConicProblem& p, const VecX& d) {
  const int n = p.dimension();
  ConstraintRows rows;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.lower[i]) || std::isfinite(p.upper[i])) rows.box_index.push_back(i);
  }
  int psd_rows = 0;
  for (const PsdBlock& b : p.psd_blocks) psd_rows += svec_size(b.size());
  const int res = static_cast<int>(p.residual_matrix.rows());
  const int nbox = static_cast<int>(rows.box_index.size());
  const int m = res + nbox + psd_rows;
  rows.residual_rows = res;
  rows.a = MatX::Zero(m, n);
  rows.c = VecX::Zero(m);
  rows.weight = VecX::Ones(m);
  rows.shift = VecX::Zero(m);

  rows.a.topRows(res) = p.residual_matrix;
  rows.c.head(res) = -p.residual_offset;

  rows.box_lo.resize(nbox);
  rows.box_hi.resize(nbox);
  for (int k = 0; k < nbox; ++k) {
    const int i = rows.box_index[k];
    const int r = res + k;
    rows.a(r, i) = 1.0;
    rows.weight[r] = 1.0 / d[i];
    rows.shift[r] = p.x_ref[i];
    rows.box_lo[k] = (p.lower[i] - p.x_ref[i]) / d[i];
    rows.box_hi[k] = (p.upper[i] - p.x_ref[i]) / d[i];
  }

  int r = res + nbox;
  for (const PsdBlock& b : p.psd_blocks) {
    const int sz = svec_size(b.size());
    rows.c.segment(r, sz) = svec(b.offset);
    for (const auto& [index, basis] : b.terms) rows.a.block(r, index, sz, 1) += svec(basis);
    // Congruence T S T with T = diag(t) equalizes the gains of the diagonal
    // rows; a common factor then brings the block to unit row gain. The cone
    // margin is raised so that T S T >= m' I still implies S >= margin I.
    const int dim = b.size();
    const MatX scaled = rows.a.block(r, 0, sz, n) * d.asDiagonal();
    VecX t = VecX::Ones(dim);
    for (int j = 0, k = 0; j < dim; k += dim - j, ++j) {
      const double g = scaled.row(k).norm();
      if (g > 0.0) t[j] = 1.0 / std::sqrt(g);
    }
    VecX entry(sz);
    for (int j = 0, k = 0; j < dim; ++j) {
      for (int i = j; i < dim; ++i) entry[k++] = t[i] * t[j];
    }
    const double gain = (entry.asDiagonal() * scaled).rowwise().norm().maxCoeff();
    const double w = gain > 0.0 ? 1.0 / gain : 1.0;
    rows.weight.segment(r, sz) = w * entry;
    rows.cones.push_back({r, dim, w * p.psd_margin * t.cwiseAbs2().maxCoeff()});
    r += sz;
  }
  return rows;
}

/// Restores lambda_min >= margin on every PSD block by blending toward the
/// anchor; returns false when the anchor itself is not strictly feasible.
bool restore_psd(const ConicProblem& p, VecX& x) {
  const auto worst = [&](const VecX& v) {
    double lo = std::numeric_limits<double>::infinity();
    for (const PsdBlock& b : p.psd_blocks) lo = std::min(lo, min_eig(b.evaluate(v)));
    return lo;
  };
  if (p.psd_blocks.empty() || worst(x) >= p.psd_margin) return true;
  if (worst(p.anchor) < p.psd_margin) return false;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (worst((1.0 - mid) * x + mid * p.anchor) >= p.psd_margin) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  x = (1.0 - hi) * x + hi * p.anchor;
  return true;
}

}  // namespace

Solution AdmmSolver::solve(const ConicProblem& input, const WarmState* warm) const {
  ConicProblem p = input;
  p.validate();
  const SolverSettings& cfg = settings_;
  const int n = p.dimension();
  Solution sol;

  for (int i = 0; i < n; ++i) {
    if (p.lower[i] > p.upper[i]) {
      sol.status = SolveStatus::kInfeasible;
      sol.x = p.x_ref;
      sol.objective = objective(p, sol.x);
      return sol;
    }
  }

  // Variable scaling x = x_ref + D u.
  const VecX d = p.q.cwiseSqrt().cwiseInverse();

  // Null-space reduction of the equalities: u = u_p + N w.
  VecX u_p = VecX::Zero(n);
  MatX basis = MatX::Identity(n, n);
  if (p.eq_matrix.rows() > 0) {
    const MatX e = p.eq_matrix * d.asDiagonal();
    const VecX rhs = p.eq_rhs - p.eq_matrix * p.x_ref;
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(e);
    cod.setThreshold(1e-10);
    u_p = cod.solve(rhs);
    const double mismatch = inf_norm(e * u_p - rhs);
    if (!(mismatch <= 1e-9 * std::max(1.0, inf_norm(rhs)))) {
      sol.status = SolveStatus::kInfeasible;
      sol.x = p.x_ref;
      sol.objective = objective(p, sol.x);
      sol.primal_residual = mismatch;
      return sol;
    }
    const int rank = static_cast<int>(cod.rank());
    Eigen::ColPivHouseholderQR<MatX> qr(e.transpose());
    qr.setThreshold(1e-10);
    const MatX q_full = qr.householderQ() * MatX::Identity(n, n);
    basis = q_full.rightCols(n - rank);
  }
  const int k = static_cast<int>(basis.cols());

  const ConstraintRows rows = build_rows(p, d);
  const int m = static_cast<int>(rows.a.rows());
  // Scaled map s' = M w + h.
  const MatX ad = rows.weight.asDiagonal() * rows.a * d.asDiagonal();
  const MatX mmat = ad * basis;
  const VecX h = rows.weight.cwiseProduct(rows.a * (p.x_ref + d.cwiseProduct(u_p)) + rows.c -
                                          rows.shift);
  const MatX gram = mmat.transpose() * mmat;
  const VecX mh = mmat.transpose() * h;

  const auto to_x = [&](const VecX& w) -> VecX {
    return p.x_ref + d.cwiseProduct(u_p + basis * w);
  };

  double rho = cfg.initial_penalty;
  VecX w = VecX::Zero(k);
  VecX z, y = VecX::Zero(m);
  bool have_z = false;
  if (warm && !warm->empty() && warm->x.size() == n) {
    w = basis.transpose() * (((warm->x - p.x_ref).cwiseQuotient(d)) - u_p);
    if (warm->z.size() == m && warm->y.size() == m) {
      z = rows.weight.cwiseProduct(warm->z - rows.shift);
      y = warm->y.cwiseQuotient(rows.weight);
      have_z = true;
    }
    if (warm->penalty > 0.0) rho = warm->penalty;
  }

  const auto project = [&](const VecX& v, double step) {
    VecX out(m);
    for (const ResidualBlock& b : p.huber_blocks) {
      out.segment(b.row_begin, b.row_count) =
          prox_huber(v.segment(b.row_begin, b.row_count), b.rho, step);
    }
    const int nbox = static_cast<int>(rows.box_index.size());
    for (int i = 0; i < nbox; ++i) {
      const int r = rows.residual_rows + i;
      out[r] = std::clamp(v[r], rows.box_lo[i], rows.box_hi[i]);
    }
    for (const auto& cone : rows.cones) {
      const int sz = svec_size(cone.size);
      out.segment(cone.row, sz) = svec(project_psd(smat(v.segment(cone.row, sz), cone.size),
                                                   cone.margin));
    }
    return out;
  };

  if (!have_z) z = project(mmat * w + h, 1.0 / rho);

  Eigen::LLT<MatX> kkt;
  const auto factor = [&]() {
    kkt.compute(MatX((2.0 + cfg.sigma) * MatX::Identity(k, k) + rho * gram));
  };
  factor();
  const double alpha = cfg.relaxation;

  // One relaxed ADMM pass from (z, y). The pair (z, y / rho) is the
  // fixed-point variable seen by the acceleration.
  struct Pass {
    VecX z_in, y_in, w, mw, z, y, g, f;
    double r_p = 0.0, r_d = 0.0;
  };
  const auto stack = [&](const VecX& zz, const VecX& yy) {
    VecX g(2 * m);
    g << zz, yy / rho;
    return g;
  };
  const auto admm_pass = [&](const VecX& z0, const VecX& y0, const VecX& w_prev) {
    Pass out;
    out.w = kkt.solve(VecX(cfg.sigma * w_prev - mmat.transpose() * (y0 + rho * (h - z0))));
    out.mw = mmat * out.w + h;
    const VecX s_hat = alpha * out.mw + (1.0 - alpha) * z0;
    out.z = project(s_hat + y0 / rho, 1.0 / rho);
    out.y = y0 + rho * (s_hat - out.z);
    out.r_p = inf_norm(out.mw - out.z);
    out.r_d = inf_norm(2.0 * out.w + mmat.transpose() * out.y);
    out.z_in = z0;
    out.y_in = y0;
    out.g = stack(z0, y0);
    out.f = stack(out.z, out.y) - out.g;
    return out;
  };

  Pass cur = admm_pass(z, y, w);
  std::deque<VecX> dg, df;
  const auto reset_memory = [&]() {
    dg.clear();
    df.clear();
  };
  int iter = 0;
  sol.status = SolveStatus::kMaxIterations;

  for (iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (cfg.on_iteration) cfg.on_iteration(iter, to_x(cur.w));
    const double tol_p = cfg.eps_abs + cfg.eps_rel * std::max(inf_norm(cur.mw), inf_norm(cur.z));
    const double tol_d = cfg.eps_abs + cfg.eps_rel * std::max(2.0 * inf_norm(cur.w),
                                                              inf_norm(mmat.transpose() * cur.y));
    if (cur.r_p <= tol_p && cur.r_d <= tol_d) {
      sol.status = SolveStatus::kOptimal;
      break;
    }
    if (!std::isfinite(cur.r_p) || !std::isfinite(cur.r_d) || inf_norm(cur.y) > 1e12) {
      sol.status = SolveStatus::kInfeasible;
      break;
    }

    if (cfg.adapt_interval > 0 && iter % cfg.adapt_interval == 0) {
      // Balance each residual against its own stopping tolerance.
      const double ratio = std::sqrt((cur.r_p / tol_p) / std::max(cur.r_d / tol_d, 1e-300));
      const double proposed = std::clamp(rho * ratio, 1e-6, 1e6);
      if (proposed > cfg.adapt_threshold * rho || proposed < rho / cfg.adapt_threshold) {
        rho = proposed;
        factor();
        reset_memory();
        cur = admm_pass(cur.z_in, cur.y_in, cur.w);
      }
    }

    // Plain step lands on T(g) = g + f. Anderson extrapolation over the last
    // few steps is tried first and kept only if it shrinks the fixed-point
    // residual.
    Pass next;
    bool accepted = false;
    if (cfg.anderson_memory > 0 && !dg.empty()) {
      const int cols = static_cast<int>(df.size());
      MatX ym(2 * m, cols), sm(2 * m, cols);
      for (int c = 0; c < cols; ++c) {
        ym.col(c) = df[c];
        sm.col(c) = dg[c];
      }
      MatX normal = ym.transpose() * ym;
      normal.diagonal().array() += 1e-10 * std::max(normal.trace(), 1e-300);
      const VecX gamma = normal.ldlt().solve(ym.transpose() * cur.f);
      const VecX g_aa = cur.g + cur.f - (sm + ym) * gamma;
      if (g_aa.allFinite()) {
        next = admm_pass(g_aa.head(m), rho * g_aa.tail(m), cur.w);
        accepted = next.f.norm() < cur.f.norm();
      }
    }
    if (!accepted) next = admm_pass(cur.z, cur.y, cur.w);
    if (cfg.anderson_memory > 0) {
      dg.push_back(next.g - cur.g);
      df.push_back(next.f - cur.f);
      while (static_cast<int>(dg.size()) > cfg.anderson_memory) {
        dg.pop_front();
        df.pop_front();
      }
    }
    cur = std::move(next);
  }
  w = cur.w;
  z = cur.z;
  y = cur.y;
  const double r_p = cur.r_p, r_d = cur.r_d;
  sol.iterations = std::min(iter, cfg.max_iterations);
  sol.primal_residual = r_p;
  sol.dual_residual = r_d;

  VecX x = to_x(w);
  sol.warm_state.x = x;
  sol.warm_state.z = z.cwiseQuotient(rows.weight) + rows.shift;
  sol.warm_state.y = y.cwiseProduct(rows.weight);
  sol.warm_state.penalty = rho;

  if (cfg.polish_feasibility && sol.status != SolveStatus::kInfeasible) {
    // Blending toward a feasible anchor keeps the equalities intact; clipping
    // is the fallback when the anchor itself violates a bound.
    const bool anchor_in_box =
        (p.anchor.array() >= p.lower.array()).all() && (p.anchor.array() <= p.upper.array()).all();
    if (anchor_in_box) {
      double t = 0.0;
      for (int i = 0; i < n; ++i) {
        const double bound = x[i] < p.lower[i] ? p.lower[i] : (x[i] > p.upper[i] ? p.upper[i] : x[i]);
        if (bound != x[i]) t = std::max(t, (x[i] - bound) / (x[i] - p.anchor[i]));
      }
      x = (1.0 - t) * x + t * p.anchor;
    }
    x = x.cwiseMax(p.lower).cwiseMin(p.upper);
    restore_psd(p, x);
  }
  sol.x = x;
  sol.objective = objective(p, x);
  return sol;
}

}  // namespace uvms
