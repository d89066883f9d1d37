#include "mbasis/coefficients.hpp"

#include <cmath>

#include "mbasis/numeric.hpp"

namespace mbasis {

CoefficientTable CoefficientTable::build(const EpsilonSequence& eps, int n) {
    if (n < 1) throw ValidationError("coefficient table length must be at least 1");
    if (n > eps.size())
        throw ValidationError("requested " + std::to_string(n) +
                              " coefficients but only " + std::to_string(eps.size()) +
                              " epsilon entries are available");

    CoefficientTable table;
    table.eps_.reserve(n);
    table.c_.reserve(n);
    table.beta_.reserve(n);
    table.prefix_.reserve(n + 1);
    table.prefix_.push_back(1.0);

    NeumaierSum prefix(1.0);
    for (int i = 1; i <= n; ++i) {
        const double e = eps.at(i);
        const double ci = (i == 1) ? e : e / prefix.value();
        prefix.add(ci);
        table.eps_.push_back(e);
        table.c_.push_back(ci);
        table.beta_.push_back(std::sqrt(ci));
        table.prefix_.push_back(prefix.value());
    }
    return table;
}

int CoefficientTable::checked(int n) const {
    if (n < 1 || n > size())
        throw ValidationError("coefficient index " + std::to_string(n) +
                              " out of range 1.." + std::to_string(size()));
    return n;
}

double CoefficientTable::prefix_sum(int n) const {
    if (n < 0 || n > size())
        throw ValidationError("prefix index " + std::to_string(n) +
                              " out of range 0.." + std::to_string(size()));
    return prefix_[static_cast<std::size_t>(n)];
}

CoefficientTable c_sequence(const EpsilonSequence& eps, int n) {
    return CoefficientTable::build(eps, n);
}

double recursion_residual(const CoefficientTable& table) {
    double worst = 0.0;
    for (int n = 2; n <= table.size(); ++n) {
        const double lhs = table.c(n) * table.prefix_sum(n - 1);
        worst = std::max(worst, std::abs(lhs - table.eps(n)) / table.eps(n));
    }
    return worst;
}

double alpha(const CoefficientTable& table, int m, int n) {
    if (m < 1 || m > table.size() || n < 1 || n > table.size())
        throw ValidationError("alpha index pair (" + std::to_string(m) + ", " +
                              std::to_string(n) + ") out of range 1.." +
                              std::to_string(table.size()));
    return m > n ? -table.beta(m) * table.beta(n) : 0.0;
}

namespace {

[[noreturn]] void throw_scan_error(const std::string& inequality, int scanned,
                                   double mass, bool exhausted) {
    std::string msg = "selection inequality " + inequality + " not met after scanning " +
                      std::to_string(scanned) + " indices (accumulated mass " +
                      format_double(mass) + ")";
    msg += exhausted ? "; coefficient table exhausted, extend the epsilon sequence"
                     : "; epsilon too summable at this scale";
    throw ScanError(msg, exhausted);
}

}  // namespace

int select_L(const CoefficientTable& table, double C, int scan_cap) {
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    if (scan_cap < 1) throw ValidationError("scan cap must be at least 1");

    const double threshold = 64.0 * C * C;
    const std::string inequality =
        "sum_{l<=L} beta_{2l-1}^2 >= 64*C^2 (= " + format_double(threshold) + ")";

    NeumaierSum mass;
    int l = 0;
    while (l < scan_cap) {
        const int idx = 2 * (l + 1) - 1;
        if (idx > table.size()) throw_scan_error(inequality, l, mass.value(), true);
        ++l;
        mass.add(table.c(idx));  // beta^2 == c by definition
        if (mass.value() >= threshold) return l;
    }
    throw_scan_error(inequality, l, mass.value(), false);
}

int select_M(const CoefficientTable& table, double C, int L, int scan_cap) {
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    if (L < 1) throw ValidationError("L must be at least 1");
    if (scan_cap < 1) throw ValidationError("scan cap must be at least 1");

    const std::string inequality =
        "sum_{k<=L} beta_{2k}^2 <= (1/8) sum_{k<=M} beta_{2k}^2 with sum_{k<=M} beta_{2k}^2 > 1";

    if (2 * L > table.size())
        throw_scan_error(inequality, 0, 0.0, true);
    NeumaierSum even_L_mass;
    for (int k = 1; k <= L; ++k) even_L_mass.add(table.c(2 * k));
    const double lhs = even_L_mass.value();

    NeumaierSum mass;
    int k = 0;
    while (k < scan_cap) {
        const int idx = 2 * (k + 1);
        if (idx > table.size()) throw_scan_error(inequality, k, mass.value(), true);
        ++k;
        mass.add(table.c(idx));
        // Exact binary64 comparisons; scaling by 8 is exact.
        if (k > L && 8.0 * lhs <= mass.value() && mass.value() > 1.0) return k;
    }
    throw_scan_error(inequality, k, mass.value(), false);
}

GammaResult gammas(const CoefficientTable& table, int M) {
    if (M < 1) throw ValidationError("M must be at least 1");
    if (2 * M > table.size())
        throw ValidationError("gamma coefficients need a table of length 2M = " +
                              std::to_string(2 * M) + ", have " +
                              std::to_string(table.size()));

    // Suffix sums tail_l = sum_{k=l..M} beta_{2k}^2, accumulated back to front
    // so that tail_1 and B are the same value.
    std::vector<double> tail(static_cast<std::size_t>(M) + 1);
    NeumaierSum acc;
    for (int l = M; l >= 1; --l) {
        acc.add(table.c(2 * l));
        tail[static_cast<std::size_t>(l)] = acc.value();
    }

    GammaResult result;
    result.B = tail[1];
    result.gamma.resize(static_cast<std::size_t>(2 * M));
    for (int k = 1; k <= M; ++k)
        result.gamma[static_cast<std::size_t>(2 * k) - 1] = table.beta(2 * k) / result.B;
    for (int l = 1; l <= M; ++l)
        result.gamma[static_cast<std::size_t>(2 * l) - 2] =
            table.beta(2 * l - 1) * (tail[static_cast<std::size_t>(l)] / result.B);
    return result;
}

double Theorem2Params::gamma_at(int n) const {
    if (n < 1 || n > static_cast<int>(gamma.size()))
        throw ValidationError("gamma index " + std::to_string(n) + " out of range 1.." +
                              std::to_string(gamma.size()));
    return gamma[static_cast<std::size_t>(n) - 1];
}

std::uint64_t params_fingerprint(const std::vector<double>& eps_bounds, double C,
                                 int L, int M, double B) {
    std::uint64_t h = fnv1a_double(C, 14695981039346656037ull);
    h = fnv1a_u64(static_cast<std::uint64_t>(L), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(M), h);
    h = fnv1a_double(B, h);
    for (double e : eps_bounds) h = fnv1a_double(e, h);
    return h;
}

}  // namespace mbasis
