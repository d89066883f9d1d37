#include "mbasis/permutations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mbasis/numeric.hpp"

namespace mbasis {

int select_t(const Theorem2Params& params, const CoefficientTable& table,
             const Permutation& order) {
    if (order.size() != params.N)
        throw ValidationError("order length " + std::to_string(order.size()) +
                              " does not match N = " + std::to_string(params.N));
    const double half_b = params.B * 0.5;
    NeumaierSum even_mass;
    for (int m = 1; m <= params.N; ++m) {
        const int n = order.image(m);
        if (n % 2 == 0) {
            even_mass.add(table.c(n));
            if (even_mass.value() >= half_b) return m;
        }
    }
    throw Error("even-index mass never reached B/2; inconsistent parameter bundle");
}

WitnessResult witness(const BiorthogonalSystem& sys, const Theorem2Params& params,
                      const CoefficientTable& table, const Permutation& order) {
    const std::uint64_t expected =
        params_fingerprint(sys.eps_bounds, params.target_C, params.L, params.M, params.B);
    if (expected != params.params_hash)
        throw ValidationError("parameter bundle fingerprint " +
                              format_hash(params.params_hash) +
                              " does not match this system (expected " +
                              format_hash(expected) + ")");
    if (sys.n_vectors != params.N)
        throw ValidationError("system has " + std::to_string(sys.n_vectors) +
                              " vectors but the parameter bundle says N = " +
                              std::to_string(params.N));

    WitnessResult out;
    out.order = order;
    out.t = select_t(params, table, order);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(sys.ambient_dim);
    for (int m = 1; m <= out.t; ++m) {
        const int n = order.image(m);
        sys.x(n).axpy_into(params.gamma_at(n), w);
    }

    const Eigen::VectorXd z = params.z_coords.dense();
    out.identity_error = (w - PartialSumOperator(sys, order, out.t).apply(z)).norm();

    out.w_norm = w.norm();
    out.z_norm = params.z_coords.norm();
    out.lower_bound = out.w_norm / out.z_norm;

    out.odd_coord_checks.reserve(static_cast<std::size_t>(params.L));
    double min_margin = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= params.L; ++l) {
        OddCoordCheck check;
        check.l = l;
        check.abs_coord = std::abs(w(2 * l - 1));
        check.threshold = table.beta(2 * l - 1) * 0.25;
        min_margin = std::min(min_margin, check.abs_coord - check.threshold);
        out.odd_coord_checks.push_back(check);
    }
    out.min_odd_margin = min_margin;
    out.w_coords = SparseVec::from_dense(w);
    return out;
}

ExhaustiveResult exhaustive_min_basis_constant(const BiorthogonalSystem& sys, int limit) {
    const int n = sys.n_vectors;
    if (n > limit) {
        std::string count;
        if (n <= 20) {
            unsigned long long fact = 1;
            for (int i = 2; i <= n; ++i) fact *= static_cast<unsigned long long>(i);
            count = std::to_string(fact);
        } else {
            double fact = 1.0;
            for (int i = 2; i <= n; ++i) fact *= static_cast<double>(i);
            count = "about " + format_double(fact);
        }
        throw SizeError("refusing to enumerate " + std::to_string(n) + "! = " + count +
                        " orders (limit " + std::to_string(limit) + ")");
    }
    std::vector<int> images(static_cast<std::size_t>(n));
    std::iota(images.begin(), images.end(), 1);

    ExhaustiveResult out;
    out.min_value = std::numeric_limits<double>::infinity();
    do {
        Permutation order(images);
        const double value = basis_constant(sys, order);
        if (value < out.min_value) {
            out.min_value = value;
            out.best_order = order;
        }
        out.table.push_back({std::move(order), value});
    } while (std::next_permutation(images.begin(), images.end()));
    return out;
}

std::vector<Permutation> sample_orders(int n, int count, std::uint64_t seed) {
    if (n < 1) throw ValidationError("order size must be positive");
    if (count < 0) throw ValidationError("sample count must be non-negative");
    std::vector<Permutation> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(i));
        std::vector<int> images(static_cast<std::size_t>(n));
        std::iota(images.begin(), images.end(), 1);
        for (int j = n - 1; j > 0; --j) {
            const auto r = static_cast<std::size_t>(
                rng.bounded(static_cast<std::uint64_t>(j) + 1));
            std::swap(images[static_cast<std::size_t>(j)], images[r]);
        }
        out.emplace_back(std::move(images));
    }
    return out;
}

std::vector<NamedOrder> adversarial_orders(int n) {
    if (n < 2 || n % 2 != 0)
        throw ValidationError("adversarial orders need even n >= 2, got " +
                              std::to_string(n));
    std::vector<NamedOrder> out;
    out.reserve(5);

    out.push_back({"natural", Permutation::natural(n)});

    std::vector<int> images(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) images[static_cast<std::size_t>(i)] = n - i;
    out.push_back({"reversed", Permutation(images)});

    images.clear();
    for (int k = 2; k <= n; k += 2) images.push_back(k);
    for (int l = 1; l <= n; l += 2) images.push_back(l);
    out.push_back({"evens_first", Permutation(images)});

    images.clear();
    for (int l = 1; l <= n; l += 2) images.push_back(l);
    for (int k = 2; k <= n; k += 2) images.push_back(k);
    out.push_back({"odds_first", Permutation(images)});

    images.clear();
    for (int i = 0; i < n / 2; ++i) {
        images.push_back(n - i);
        images.push_back(i + 1);
    }
    out.push_back({"interleave_reversed", Permutation(images)});
    return out;
}

}  // namespace mbasis
