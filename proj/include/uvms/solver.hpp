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

#pragma once

// Convex solver for the estimation problem class
//
//   minimize    sum_i q_i (x_i - x_ref_i)^2 + sum_b huber_rho_b(R_b x - d_b)
//   subject to  E x = e,  lower <= x <= upper,  S_k(x) >= margin I
//
// where every S_k is a symmetric matrix affine in x. The ADMM implementation
// works on a rescaled problem: x = x_ref + D u with D = diag(1/sqrt(q)), and
// equalities are removed by a null-space parameterization of u.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uvms/spatial.hpp"

namespace uvms {

/// Rows [row_begin, row_begin + row_count) of the residual matrix penalized
/// together by a block Huber function with threshold rho (may be +inf).
struct ResidualBlock {
  int row_begin = 0;
  int row_count = 0;
  double rho = 1.0;
};

/// S(x) = offset + sum_k x[terms[k].first] * terms[k].second.
struct PsdBlock {
  MatX offset;
  std::vector<std::pair<int, MatX>> terms;

  int size() const { return static_cast<int>(offset.rows()); }
  MatX evaluate(const VecX& x) const;
};

struct ConicProblem {
  VecX q;
  VecX x_ref;
  MatX residual_matrix;
  VecX residual_offset;
  /// Must partition the residual rows.
  std::vector<ResidualBlock> huber_blocks;
  MatX eq_matrix;
  VecX eq_rhs;
  VecX lower;
  VecX upper;
  std::vector<PsdBlock> psd_blocks;
  double psd_margin = 1e-8;
  /// Strictly feasible point used to restore PSD feasibility after the
  /// iterations stop. Defaults to x_ref when empty.
  VecX anchor;

  int dimension() const { return static_cast<int>(q.size()); }
  /// Fills empty optional members and throws std::invalid_argument on
  /// inconsistent dimensions, non-positive weights or a bad block partition.
  void validate();
};

enum class SolveStatus { kOptimal, kMaxIterations, kInfeasible };
std::string to_string(SolveStatus status);

/// Restart data in the units of the original problem.
struct WarmState {
  VecX x;
  /// Constraint values and multipliers, rows ordered as
  /// [residual rows; bounded coordinates; svec of each PSD block].
  VecX z;
  VecX y;
  double penalty = 0.0;

  bool empty() const { return x.size() == 0; }
};

struct Solution {
  VecX x;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  WarmState warm_state;
};

struct SolverSettings {
  double eps_abs = 1e-6;
  double eps_rel = 0.0;
  int max_iterations = 2000;
  double relaxation = 1.6;
  double sigma = 1e-6;
  double initial_penalty = 1.0;
  /// Residual balancing every this many iterations.
  int adapt_interval = 25;
  double adapt_threshold = 5.0;
  /// Anderson acceleration depth on the (z, y) iterates; 0 disables it.
  int anderson_memory = 8;
  /// Clip to bounds and restore PSD feasibility on the returned point.
  bool polish_feasibility = true;
  /// Called after every iteration with (iteration, current x).
  std::function<void(int, const VecX&)> on_iteration;
};

class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual Solution solve(const ConicProblem& problem, const WarmState* warm) const = 0;
  Solution solve(const ConicProblem& problem) const { return solve(problem, nullptr); }
};

class AdmmSolver : public ConicSolver {
 public:
  AdmmSolver() = default;
  explicit AdmmSolver(SolverSettings settings) : settings_(std::move(settings)) {}
  using ConicSolver::solve;
  Solution solve(const ConicProblem& problem, const WarmState* warm) const override;
  const SolverSettings& settings() const { return settings_; }

 private:
  SolverSettings settings_;
};

/// Block Huber penalty: |v|^2 inside the rho ball, 2 rho |v| - rho^2 outside.
double huber_value(const VecX& v, double rho);
/// argmin_x step * huber(x) + 0.5 |x - z|^2.
VecX prox_huber(const VecX& z, double rho, double step);
/// Nearest matrix in Frobenius norm whose eigenvalues are >= margin.
MatX project_psd(const MatX& s, double margin = 0.0);
/// Objective of `problem` at x (constraints not checked).
double objective(const ConicProblem& problem, const VecX& x);
/// Largest violation of equalities, bounds and PSD blocks (0 when feasible).
double constraint_violation(const ConicProblem& problem, const VecX& x);

}  // namespace uvms
