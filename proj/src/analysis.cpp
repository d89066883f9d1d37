#include "mbasis/analysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mbasis/numeric.hpp"

namespace mbasis {

PartialSumOperator::PartialSumOperator(const BiorthogonalSystem& sys, Permutation order, int k)
    : sys_(&sys), order_(std::move(order)), k_(k) {
    if (order_.size() != sys.n_vectors)
        throw ValidationError("order length " + std::to_string(order_.size()) +
                              " does not match n_vectors " + std::to_string(sys.n_vectors));
    if (k < 0 || k > sys.n_vectors)
        throw ValidationError("prefix length " + std::to_string(k) + " out of range 0.." +
                              std::to_string(sys.n_vectors));
}

Eigen::VectorXd PartialSumOperator::apply(const Eigen::VectorXd& v) const {
    if (v.size() != sys_->ambient_dim)
        throw ValidationError("vector dimension does not match ambient_dim");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (int m = 1; m <= k_; ++m) {
        const int n = order_.image(m);
        sys_->x(n).axpy_into(sys_->xdual(n).dot(v), out);
    }
    return out;
}

Eigen::VectorXd PartialSumOperator::apply_adjoint(const Eigen::VectorXd& v) const {
    if (v.size() != sys_->ambient_dim)
        throw ValidationError("vector dimension does not match ambient_dim");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (int m = 1; m <= k_; ++m) {
        const int n = order_.image(m);
        sys_->xdual(n).axpy_into(sys_->x(n).dot(v), out);
    }
    return out;
}

Eigen::MatrixXd PartialSumOperator::dense() const {
    const int d = sys_->ambient_dim;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (int m = 1; m <= k_; ++m) {
        const int n = order_.image(m);
        out += sys_->x(n).dense() * sys_->xdual(n).dense().transpose();
    }
    return out;
}

double biorthogonality_residual(const BiorthogonalSystem& sys) {
    double worst = 0.0;
    for (int i = 1; i <= sys.n_vectors; ++i) {
        for (int j = 1; j <= sys.n_vectors; ++j) {
            const double target = i == j ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(sys.x(i).dot(sys.xdual(j)) - target));
        }
    }
    return worst;
}

std::vector<ProfileRow> boundedness_profile(const BiorthogonalSystem& sys) {
    std::vector<ProfileRow> rows;
    rows.reserve(static_cast<std::size_t>(sys.n_vectors));
    for (int n = 1; n <= sys.n_vectors; ++n) {
        ProfileRow row;
        row.n = n;
        row.norm_x = sys.x(n).norm();
        row.norm_dual = sys.xdual(n).norm();
        row.product = row.norm_x * row.norm_dual;
        row.bound = sys.bound(n);
        row.margin = row.bound - row.product;
        rows.push_back(row);
    }
    return rows;
}

namespace {

double largest_singular_value_dense(const Eigen::MatrixXd& a) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

// Power iteration on A^T A through callables. Returns ||A|| to relative tol.
template <typename Apply, typename ApplyAdjoint>
double power_iteration_norm(int dim, Apply&& apply, ApplyAdjoint&& adjoint,
                            const SpectralOptions& opts) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd w = adjoint(apply(v));
        const double lambda = w.norm();  // estimate of sigma_max^2
        if (lambda == 0.0) return 0.0;
        const double next = std::sqrt(lambda);
        w /= lambda;
        const bool settled = std::abs(next - estimate) <= opts.tol * std::max(next, 1e-300);
        estimate = next;
        v = std::move(w);
        if (settled && it > 0) return estimate;
    }
    throw ConvergenceError("spectral norm power iteration did not settle within " +
                           std::to_string(opts.max_iter) + " iterations (last estimate " +
                           format_double(estimate) + ")",
                           estimate);
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& a, const SpectralOptions& opts) {
    if (!(opts.tol > 0.0)) throw ValidationError("spectral tolerance must be positive");
    if (a.size() == 0) return 0.0;
    if (!opts.force_iterative &&
        std::max(a.rows(), a.cols()) <= static_cast<Eigen::Index>(opts.dense_cutoff))
        return largest_singular_value_dense(a);
    return power_iteration_norm(
        static_cast<int>(a.cols()), [&](const Eigen::VectorXd& v) { return (a * v).eval(); },
        [&](const Eigen::VectorXd& v) { return (a.transpose() * v).eval(); }, opts);
}

double spectral_norm(const PartialSumOperator& op, const SpectralOptions& opts) {
    if (!(opts.tol > 0.0)) throw ValidationError("spectral tolerance must be positive");
    if (op.k() == 0) return 0.0;
    if (!opts.force_iterative && op.dim() <= opts.dense_cutoff)
        return largest_singular_value_dense(op.dense());
    return power_iteration_norm(
        op.dim(), [&](const Eigen::VectorXd& v) { return op.apply(v); },
        [&](const Eigen::VectorXd& v) { return op.apply_adjoint(v); }, opts);
}

double basis_constant(const BiorthogonalSystem& sys, const Permutation& order,
                      const SpectralOptions& opts) {
    if (order.size() != sys.n_vectors)
        throw ValidationError("order length does not match n_vectors");
    if (sys.ambient_dim > opts.dense_cutoff && !opts.force_iterative)
        throw SizeError("basis constant at ambient dimension " +
                        std::to_string(sys.ambient_dim) + " exceeds the dense cutoff " +
                        std::to_string(opts.dense_cutoff) +
                        "; set force_iterative to accept the iterative path");
    double best = 0.0;
    if (!opts.force_iterative) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sys.ambient_dim, sys.ambient_dim);
        for (int k = 1; k <= sys.n_vectors; ++k) {
            const int n = order.image(k);
            s += sys.x(n).dense() * sys.xdual(n).dense().transpose();
            best = std::max(best, largest_singular_value_dense(s));
        }
        return best;
    }
    for (int k = 1; k <= sys.n_vectors; ++k)
        best = std::max(best, spectral_norm(PartialSumOperator(sys, order, k), opts));
    return best;
}

double lower_bound_via_vector(const BiorthogonalSystem& sys, const Permutation& order,
                              const Eigen::VectorXd& v) {
    if (order.size() != sys.n_vectors)
        throw ValidationError("order length does not match n_vectors");
    if (v.size() != sys.ambient_dim)
        throw ValidationError("vector dimension does not match ambient_dim");
    const double v_norm = v.norm();
    if (v_norm == 0.0) throw ValidationError("lower bound probe vector is zero");

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(v.size());
    double acc_sq = 0.0;  // running ||acc||^2, refreshed periodically against drift
    double best_sq = 0.0;
    for (int m = 1; m <= sys.n_vectors; ++m) {
        const int n = order.image(m);
        const SparseVec& x = sys.x(n);
        const double coeff = sys.xdual(n).dot(v);
        acc_sq += 2.0 * coeff * x.dot(acc) + coeff * coeff * x.squared_norm();
        x.axpy_into(coeff, acc);
        if (m % 1024 == 0) acc_sq = acc.squaredNorm();
        best_sq = std::max(best_sq, acc_sq);
    }
    return std::sqrt(std::max(best_sq, 0.0)) / v_norm;
}

FrameBounds frame_bounds(const BiorthogonalSystem& sys, int prefix_n) {
    if (prefix_n < 1 || prefix_n > sys.n_vectors)
        throw ValidationError("frame prefix " + std::to_string(prefix_n) +
                              " out of range 1.." + std::to_string(sys.n_vectors));
    Eigen::MatrixXd x(sys.ambient_dim, prefix_n);
    for (int j = 0; j < prefix_n; ++j) x.col(j) = sys.x(j + 1).dense();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
    const auto& sv = svd.singularValues();
    FrameBounds out;
    out.sigma_max_sq = sv(0) * sv(0);
    const double smin = sv(sv.size() - 1);
    out.sigma_min_sq = smin * smin;
    out.condition_number = out.sigma_min_sq > 0.0
                               ? out.sigma_max_sq / out.sigma_min_sq
                               : std::numeric_limits<double>::infinity();
    return out;
}

double distance_to_span(const Eigen::VectorXd& v, const std::vector<SparseVec>& vectors) {
    if (vectors.empty()) return v.norm();
    const int dim = vectors.front().dim();
    if (v.size() != dim) throw ValidationError("vector dimension does not match the span family");
    Eigen::MatrixXd a(dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        if (vectors[j].dim() != dim)
            throw ValidationError("span family has mixed dimensions");
        a.col(static_cast<Eigen::Index>(j)) = vectors[j].dense();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-12 * sv(0);
    Eigen::VectorXd residual = v;
    for (Eigen::Index j = 0; j < sv.size(); ++j) {
        if (!(sv(j) > cutoff)) break;
        const Eigen::VectorXd q = svd.matrixU().col(j);
        residual -= q.dot(v) * q;
    }
    return residual.norm();
}

StrongnessResult strongness_diagnostic(const BiorthogonalSystem& sys,
                                       const Eigen::VectorXd& v) {
    if (v.size() != sys.ambient_dim)
        throw ValidationError("vector dimension does not match ambient_dim");
    StrongnessResult out;
    std::vector<SparseVec> active_primals;
    for (int n = 1; n <= sys.n_vectors; ++n) {
        if (std::abs(sys.xdual(n).dot(v)) > 1e-12) {
            out.active.push_back(n);
            active_primals.push_back(sys.x(n));
        }
    }
    out.distance = distance_to_span(v, active_primals);
    return out;
}

AnalysisReport analyze(const BiorthogonalSystem& sys,
                       const std::optional<Permutation>& basis_constant_order,
                       const SpectralOptions& opts) {
    AnalysisReport report;
    report.biorthogonality_residual = biorthogonality_residual(sys);
    report.profile = boundedness_profile(sys);
    report.frame = frame_bounds(sys, sys.n_vectors);
    if (basis_constant_order)
        report.basis_constant =
            BasisConstantEntry{*basis_constant_order,
                               basis_constant(sys, *basis_constant_order, opts)};
    return report;
}

}  // namespace mbasis
