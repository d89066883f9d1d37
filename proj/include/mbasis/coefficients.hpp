#pragma once

#include <cstdint>
#include <vector>

#include "mbasis/epsilon.hpp"
#include "mbasis/sparse.hpp"

namespace mbasis {

// Derived coefficient table. The recursion is
//
//     c_1 = eps_1,   c_{n+1} = eps_{n+1} / (1 + c_1 + ... + c_n),
//
// with beta_n = sqrt(c_n) and prefix_sum(n) = 1 + c_1 + ... + c_n.
// Prefix sums are accumulated with compensated summation: the recursion feeds
// on its own partial sums, so plain accumulation would compound drift.
//
// All accessors are 1-based to match the subscripts the construction uses.
class CoefficientTable {
public:
    CoefficientTable() = default;

    // First n entries; throws ValidationError if eps has fewer than n terms.
    static CoefficientTable build(const EpsilonSequence& eps, int n);

    int size() const { return static_cast<int>(c_.size()); }
    double eps(int n) const { return eps_[checked(n) - 1]; }
    double c(int n) const { return c_[checked(n) - 1]; }
    double beta(int n) const { return beta_[checked(n) - 1]; }

    // prefix_sum(0) == 1; prefix_sum(n) = 1 + c_1 + ... + c_n.
    double prefix_sum(int n) const;

    const std::vector<double>& c_values() const { return c_; }
    const std::vector<double>& eps_values() const { return eps_; }

private:
    int checked(int n) const;

    std::vector<double> eps_, c_, beta_;
    std::vector<double> prefix_;  // prefix_[n] = prefix_sum(n), n = 0..size
};

CoefficientTable c_sequence(const EpsilonSequence& eps, int n);

// Worst relative defect of c(n) * prefix_sum(n-1) against eps(n) over the
// whole table; a direct probe of how tight the recursion is held.
double recursion_residual(const CoefficientTable& table);

// alpha(m, n) = -beta_m * beta_n when m > n, and 0 otherwise.
double alpha(const CoefficientTable& table, int m, int n);

// Smallest L with sum_{l<=L} beta_{2l-1}^2 >= 64 C^2. Scans at most scan_cap
// odd indices; throws ScanError when the mass never reaches the threshold.
int select_L(const CoefficientTable& table, double C, int scan_cap);

// Smallest M > L with sum_{k<=L} beta_{2k}^2 <= (1/8) sum_{k<=M} beta_{2k}^2
// and sum_{k<=M} beta_{2k}^2 > 1. Same scan-cap contract as select_L.
int select_M(const CoefficientTable& table, double C, int L, int scan_cap);

struct GammaResult {
    std::vector<double> gamma;  // gamma[i] is the coefficient of vector i+1, size 2M
    double B = 0.0;             // sum_{k<=M} beta_{2k}^2
};

// gamma_{2k} = beta_{2k} / B and gamma_{2l-1} = (beta_{2l-1} / B) * tail_l with
// tail_l = sum_{k=l..M} beta_{2k}^2. B is taken from the same suffix
// accumulation, so gamma_1 == beta_1 holds exactly.
GammaResult gammas(const CoefficientTable& table, int M);

// Certificate bundle for a permutation-resistant build of size N = 2M.
struct Theorem2Params {
    double target_C = 0.0;
    int L = 0;
    int M = 0;
    int N = 0;  // always 2M
    double B = 0.0;
    std::vector<double> gamma;  // size 2M, gamma[i] for vector i+1
    SparseVec z_coords;         // witness element in ambient coordinates
    std::uint64_t params_hash = 0;

    double gamma_at(int n) const;  // 1-based
};

// Fingerprint tying a parameter bundle to the build inputs it came from.
// Deliberately excludes gamma and z so that value tampering is caught by the
// witness identity check rather than masked as a pairing error.
std::uint64_t params_fingerprint(const std::vector<double>& eps_bounds, double C,
                                 int L, int M, double B);

}  // namespace mbasis
