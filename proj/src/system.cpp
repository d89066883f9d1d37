#include "mbasis/system.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <utility>

#include "mbasis/numeric.hpp"

namespace mbasis {

std::string to_string(DualMode mode) {
    return mode == DualMode::projected ? "projected" : "raw";
}

DualMode dual_mode_from_string(const std::string& name) {
    if (name == "projected") return DualMode::projected;
    if (name == "raw") return DualMode::raw;
    throw ValidationError("unknown dual mode '" + name + "' (expected projected or raw)");
}

int BiorthogonalSystem::checked(int n) const {
    if (n < 1 || n > n_vectors)
        throw ValidationError("vector index " + std::to_string(n) + " out of range 1.." +
                              std::to_string(n_vectors));
    return n;
}

void BiorthogonalSystem::validate() const {
    if (ambient_dim < 1) throw ValidationError("ambient_dim must be positive");
    if (n_vectors < 1) throw ValidationError("n_vectors must be positive");
    if (n_vectors > ambient_dim)
        throw ValidationError("n_vectors " + std::to_string(n_vectors) +
                              " exceeds ambient_dim " + std::to_string(ambient_dim));
    if (static_cast<int>(primal.size()) != n_vectors ||
        static_cast<int>(dual.size()) != n_vectors ||
        static_cast<int>(eps_bounds.size()) != n_vectors)
        throw ValidationError("primal/dual/eps_bounds lengths disagree with n_vectors");
    for (int i = 0; i < n_vectors; ++i) {
        if (primal[static_cast<std::size_t>(i)].dim() != ambient_dim ||
            dual[static_cast<std::size_t>(i)].dim() != ambient_dim)
            throw ValidationError("vector " + std::to_string(i + 1) +
                                  " has a dimension other than ambient_dim");
    }
    if (meta.theorem2 && meta.theorem2->N != n_vectors)
        throw ValidationError("theorem2 metadata N disagrees with n_vectors");
}

BiorthogonalSystem make_orthonormal(int n) {
    if (n < 1) throw ValidationError("orthonormal system size must be positive");
    BiorthogonalSystem sys;
    sys.ambient_dim = n;
    sys.n_vectors = n;
    sys.primal.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sys.primal.push_back(SparseVec::unit(n, i));
    sys.dual = sys.primal;
    sys.eps_bounds.assign(static_cast<std::size_t>(n), 1.0);
    sys.meta.builder = "orthonormal";
    sys.meta.params = {{"n", n}};
    return sys;
}

namespace {

SparseVec raw_primal(const CoefficientTable& table, int n, int dim) {
    if (n % 2 == 1) return SparseVec::unit(dim, n);
    const int k = n / 2;
    std::vector<std::pair<int, double>> entries;
    entries.reserve(static_cast<std::size_t>(k) + 2);
    const double b = table.beta(n);
    entries.emplace_back(0, b);
    for (int l = 1; l <= k; ++l) entries.emplace_back(2 * l - 1, -b * table.beta(2 * l - 1));
    entries.emplace_back(2 * k, 1.0);
    return SparseVec(dim, std::move(entries));
}

SparseVec raw_dual(const CoefficientTable& table, int n, int dim) {
    if (n % 2 == 0) return SparseVec::unit(dim, n);
    const int l = (n + 1) / 2;
    std::vector<std::pair<int, double>> entries;
    entries.reserve(static_cast<std::size_t>(l) + 1);
    const double b = table.beta(n);
    entries.emplace_back(0, b);
    for (int k = 1; k < l; ++k) entries.emplace_back(2 * k, -b * table.beta(2 * k));
    entries.emplace_back(2 * l - 1, 1.0);
    return SparseVec(dim, std::move(entries));
}

// Normal of the hyperplane span(x_1..x_N) inside the (N+1)-dimensional
// ambient space: u = frak_e - sum_{2k<=N} beta_{2k} e_{2k}. Every primal is
// orthogonal to u with exact coordinate cancellation, so projecting duals as
// y - (<y,u>/|u|^2) u is the projection onto span(primal).
SparseVec complement_normal(const CoefficientTable& table, int N) {
    std::vector<std::pair<int, double>> entries;
    entries.reserve(static_cast<std::size_t>(N / 2) + 1);
    entries.emplace_back(0, 1.0);
    for (int k = 1; 2 * k <= N; ++k) entries.emplace_back(2 * k, -table.beta(2 * k));
    return SparseVec(N + 1, std::move(entries));
}

SparseVec project_off(const SparseVec& y, const SparseVec& u, double u_norm2) {
    const double coeff = y.dot(u) / u_norm2;
    Eigen::VectorXd acc = y.dense();
    u.axpy_into(-coeff, acc);
    return SparseVec::from_dense(acc);
}

}  // namespace

BiorthogonalSystem build_truncated(const EpsilonSequence& eps, int N, DualMode mode) {
    if (N < 1) throw ValidationError("truncation length must be positive");
    if (N > eps.size())
        throw ValidationError("truncation length " + std::to_string(N) +
                              " exceeds epsilon sequence length " + std::to_string(eps.size()));
    const CoefficientTable table = CoefficientTable::build(eps, N);
    const int dim = N + 1;

    BiorthogonalSystem sys;
    sys.ambient_dim = dim;
    sys.n_vectors = N;
    sys.primal.reserve(static_cast<std::size_t>(N));
    sys.dual.reserve(static_cast<std::size_t>(N));
    sys.eps_bounds.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) {
        sys.primal.push_back(raw_primal(table, n, dim));
        sys.dual.push_back(raw_dual(table, n, dim));
        sys.eps_bounds.push_back(1.0 + table.eps(n));
    }
    if (mode == DualMode::projected) {
        const SparseVec u = complement_normal(table, N);
        const double u_norm2 = u.squared_norm();
        for (auto& y : sys.dual) y = project_off(y, u, u_norm2);
    }
    sys.meta.builder = "truncated";
    sys.meta.params = {{"N", N}, {"duals", to_string(mode)}};
    return sys;
}

Theorem2Build build_theorem2(const EpsilonSequence& eps, double C, const BuildOptions& opts) {
    if (!(C > 0.0)) throw ValidationError("target constant C must be positive");
    const CoefficientTable table = CoefficientTable::build(eps, eps.size());
    const int L = select_L(table, C, opts.scan_cap);
    const int M = select_M(table, C, L, opts.scan_cap);
    const int N = 2 * M;
    if (N + 1 > opts.max_dim)
        throw DimensionError("ambient dimension " + std::to_string(N + 1) + " for C = " +
                             format_double(C) + " exceeds max_dim " +
                             std::to_string(opts.max_dim));

    Theorem2Build out;
    out.system = build_truncated(eps, N, opts.duals);

    GammaResult g = gammas(table, M);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(N + 1);
    for (int n = 1; n <= N; ++n)
        out.system.x(n).axpy_into(g.gamma[static_cast<std::size_t>(n) - 1], z);

    Theorem2Params params;
    params.target_C = C;
    params.L = L;
    params.M = M;
    params.N = N;
    params.B = g.B;
    params.gamma = std::move(g.gamma);
    params.z_coords = SparseVec::from_dense(z);
    params.params_hash = params_fingerprint(out.system.eps_bounds, C, L, M, params.B);

    out.system.meta.builder = "theorem2";
    out.system.meta.params = {{"C", C},
                              {"scan_cap", opts.scan_cap},
                              {"duals", to_string(opts.duals)}};
    out.system.meta.theorem2 = params;
    out.params = std::move(params);
    return out;
}

std::vector<SparseVec> dual_via_projection(const std::vector<SparseVec>& primal,
                                           const std::vector<SparseVec>& raw_duals) {
    if (primal.empty()) throw ValidationError("projection needs a nonempty primal family");
    const int dim = primal.front().dim();
    for (const auto& p : primal)
        if (p.dim() != dim) throw ValidationError("primal vectors have mixed dimensions");
    for (const auto& y : raw_duals)
        if (y.dim() != dim) throw ValidationError("raw dual dimension differs from primal");

    const int n = static_cast<int>(primal.size());
    Eigen::MatrixXd X(dim, n);
    for (int j = 0; j < n; ++j) X.col(j) = primal[static_cast<std::size_t>(j)].dense();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    const double smallest = sv(sv.size() - 1);
    const double ratio = largest > 0.0 ? smallest / largest : 0.0;
    if (!(ratio > 1e-10))
        throw ConditioningError("primal family is numerically rank-deficient "
                                "(sigma_min/sigma_max = " + format_double(ratio) + ")",
                                ratio);

    const Eigen::MatrixXd Q = svd.matrixU().leftCols(sv.size());
    std::vector<SparseVec> projected;
    projected.reserve(raw_duals.size());
    for (const auto& y : raw_duals) {
        const Eigen::VectorXd yd = y.dense();
        projected.push_back(SparseVec::from_dense(Q * (Q.transpose() * yd)));
    }
    return projected;
}

BiorthogonalSystem build_block_sum(const std::vector<BiorthogonalSystem>& blocks,
                                   const EpsilonSequence& eps_concat) {
    if (blocks.empty()) throw ValidationError("block sum needs at least one block");
    int total_vectors = 0;
    int total_dim = 0;
    for (const auto& b : blocks) {
        b.validate();
        total_vectors += b.n_vectors;
        total_dim += b.ambient_dim;
    }
    if (eps_concat.size() != total_vectors)
        throw ValidationError("eps length mismatch: blocks carry " +
                              std::to_string(total_vectors) + " vectors but eps_concat has " +
                              std::to_string(eps_concat.size()) + " entries");

    BiorthogonalSystem sys;
    sys.ambient_dim = total_dim;
    sys.n_vectors = total_vectors;
    sys.primal.reserve(static_cast<std::size_t>(total_vectors));
    sys.dual.reserve(static_cast<std::size_t>(total_vectors));
    sys.eps_bounds.reserve(static_cast<std::size_t>(total_vectors));

    nlohmann::json block_meta = nlohmann::json::array();
    int offset = 0;
    int index = 1;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.n_vectors; ++i, ++index) {
            const double bound = b.eps_bounds[static_cast<std::size_t>(i)];
            if (bound != 1.0 + eps_concat.at(index))
                throw ValidationError("eps_concat entry " + std::to_string(index) +
                                      " does not match the block bound at that slot");
            sys.primal.push_back(b.primal[static_cast<std::size_t>(i)].shifted(offset, total_dim));
            sys.dual.push_back(b.dual[static_cast<std::size_t>(i)].shifted(offset, total_dim));
            sys.eps_bounds.push_back(bound);
        }
        block_meta.push_back({{"builder", b.meta.builder},
                              {"params", b.meta.params},
                              {"coord_offset", offset},
                              {"n_vectors", b.n_vectors},
                              {"ambient_dim", b.ambient_dim}});
        offset += b.ambient_dim;
    }
    sys.meta.builder = "block_sum";
    sys.meta.params = {{"blocks", std::move(block_meta)}};
    return sys;
}

BiorthogonalSystem pad_orthonormal(const BiorthogonalSystem& sys, int K,
                                   const std::vector<int>& positions,
                                   const std::vector<double>& eps_values) {
    sys.validate();
    if (K < 0) throw ValidationError("padding count must be non-negative");
    if (static_cast<int>(positions.size()) != K)
        throw ValidationError("positions list must have length K = " + std::to_string(K));
    if (!eps_values.empty() && static_cast<int>(eps_values.size()) != K)
        throw ValidationError("eps_values must be empty or have length K");
    for (double e : eps_values)
        if (e < 0.0) throw ValidationError("padded eps values must be non-negative");
    if (K == 0) return sys;

    const int n_new = sys.n_vectors + K;
    const int dim_new = sys.ambient_dim + K;
    std::vector<int> slot(static_cast<std::size_t>(n_new), -1);  // padded slot -> fresh axis
    for (int j = 0; j < K; ++j) {
        const int pos = positions[static_cast<std::size_t>(j)];
        if (pos < 1 || pos > n_new)
            throw ValidationError("padding position " + std::to_string(pos) +
                                  " out of range 1.." + std::to_string(n_new));
        if (slot[static_cast<std::size_t>(pos) - 1] != -1)
            throw ValidationError("padding position " + std::to_string(pos) + " repeated");
        slot[static_cast<std::size_t>(pos) - 1] = j;
    }

    BiorthogonalSystem out;
    out.ambient_dim = dim_new;
    out.n_vectors = n_new;
    out.primal.reserve(static_cast<std::size_t>(n_new));
    out.dual.reserve(static_cast<std::size_t>(n_new));
    out.eps_bounds.reserve(static_cast<std::size_t>(n_new));
    int old_i = 0;
    for (int i = 0; i < n_new; ++i) {
        const int j = slot[static_cast<std::size_t>(i)];
        if (j >= 0) {
            SparseVec fresh = SparseVec::unit(dim_new, sys.ambient_dim + j);
            out.primal.push_back(fresh);
            out.dual.push_back(std::move(fresh));
            out.eps_bounds.push_back(eps_values.empty()
                                         ? 1.0
                                         : 1.0 + eps_values[static_cast<std::size_t>(j)]);
        } else {
            out.primal.push_back(sys.primal[static_cast<std::size_t>(old_i)].shifted(0, dim_new));
            out.dual.push_back(sys.dual[static_cast<std::size_t>(old_i)].shifted(0, dim_new));
            out.eps_bounds.push_back(sys.eps_bounds[static_cast<std::size_t>(old_i)]);
            ++old_i;
        }
    }
    out.meta.builder = "padded";
    out.meta.params = {{"base_builder", sys.meta.builder},
                       {"base_params", sys.meta.params},
                       {"K", K},
                       {"positions", positions}};
    return out;
}

}  // namespace mbasis
