#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mbasis/permutation.hpp"
#include "mbasis/system.hpp"

namespace mbasis {

struct SpectralOptions {
    double tol = 1e-10;
    int max_iter = 10'000;
    int dense_cutoff = 512;
    bool force_iterative = false;
};

// Rank-k factored operator v -> sum_{m<=k} <v, dual_{pi(m)}> primal_{pi(m)}.
// Never materialized unless dense() is asked for.
class PartialSumOperator {
public:
    PartialSumOperator(const BiorthogonalSystem& sys, Permutation order, int k);

    int k() const { return k_; }
    int dim() const { return sys_->ambient_dim; }
    const Permutation& order() const { return order_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd dense() const;

private:
    const BiorthogonalSystem* sys_;
    Permutation order_;
    int k_;
};

struct ProfileRow {
    int n = 0;
    double norm_x = 0.0;
    double norm_dual = 0.0;
    double product = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - product
};

struct FrameBounds {
    double sigma_min_sq = 0.0;
    double sigma_max_sq = 0.0;
    double condition_number = 0.0;
};

struct BasisConstantEntry {
    Permutation order;
    double value = 0.0;
};

struct AnalysisReport {
    double biorthogonality_residual = 0.0;
    std::vector<ProfileRow> profile;
    FrameBounds frame;
    std::optional<BasisConstantEntry> basis_constant;
};

struct StrongnessResult {
    std::vector<int> active;  // 1-based indices with |<v, dual_n>| > 1e-12
    double distance = 0.0;
};

// max over (i, j) of |<primal_i, dual_j> - delta_ij|
double biorthogonality_residual(const BiorthogonalSystem& sys);

std::vector<ProfileRow> boundedness_profile(const BiorthogonalSystem& sys);

// Largest singular value. Matrices up to dense_cutoff go through a full
// decomposition; beyond that, power iteration on A^T A with a deterministic
// all-ones start. Non-convergence raises ConvergenceError with the last
// iterate's estimate.
double spectral_norm(const Eigen::MatrixXd& a, const SpectralOptions& opts = {});
double spectral_norm(const PartialSumOperator& op, const SpectralOptions& opts = {});

// max_{1<=k<=n} ||S_k|| for the given order. Guarded by dense_cutoff unless
// force_iterative is set.
double basis_constant(const BiorthogonalSystem& sys, const Permutation& order,
                      const SpectralOptions& opts = {});

// max_k ||S_k v|| / ||v||, accumulated incrementally so only the touched
// coordinates are paid for at each step.
double lower_bound_via_vector(const BiorthogonalSystem& sys, const Permutation& order,
                              const Eigen::VectorXd& v);

// Extreme squared singular values of the first prefix_n primal vectors.
FrameBounds frame_bounds(const BiorthogonalSystem& sys, int prefix_n);

// Euclidean distance from v to span(vectors); rank decisions at 1e-12.
double distance_to_span(const Eigen::VectorXd& v, const std::vector<SparseVec>& vectors);

StrongnessResult strongness_diagnostic(const BiorthogonalSystem& sys,
                                       const Eigen::VectorXd& v);

AnalysisReport analyze(const BiorthogonalSystem& sys,
                       const std::optional<Permutation>& basis_constant_order = std::nullopt,
                       const SpectralOptions& opts = {});

}  // namespace mbasis
