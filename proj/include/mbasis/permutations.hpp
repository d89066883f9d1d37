#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbasis/analysis.hpp"
#include "mbasis/coefficients.hpp"
#include "mbasis/permutation.hpp"
#include "mbasis/system.hpp"

namespace mbasis {

struct OddCoordCheck {
    int l = 0;
    double abs_coord = 0.0;   // |<w, e_{2l-1}>|
    double threshold = 0.0;   // beta_{2l-1} / 4
};

struct WitnessResult {
    Permutation order;
    int t = 0;
    SparseVec w_coords;
    double w_norm = 0.0;
    double z_norm = 0.0;
    double lower_bound = 0.0;  // w_norm / z_norm
    std::vector<OddCoordCheck> odd_coord_checks;
    double min_odd_margin = 0.0;    // min over checks of abs_coord - threshold
    double identity_error = 0.0;    // || direct w  -  S_t z ||
};

// Crossing index: the unique t whose even-index coefficient mass first
// reaches B/2. Comparisons are exact binary64; the first element already
// carrying >= B/2 yields t = its own position.
int select_t(const Theorem2Params& params, const CoefficientTable& table,
             const Permutation& order);

// Evaluates the permuted-prefix witness w = sum_{m<=t} gamma_{pi(m)} x_{pi(m)},
// its coordinate guarantees, and the independent partial-sum identity.
// Refuses a params bundle whose fingerprint does not match the system.
WitnessResult witness(const BiorthogonalSystem& sys, const Theorem2Params& params,
                      const CoefficientTable& table, const Permutation& order);

struct OrderValue {
    Permutation order;
    double value = 0.0;
};

struct ExhaustiveResult {
    Permutation best_order;
    double min_value = 0.0;
    std::vector<OrderValue> table;
};

// Minimum of basis_constant over all n! orders. Refuses n above the limit,
// naming the factorial it would have enumerated.
ExhaustiveResult exhaustive_min_basis_constant(const BiorthogonalSystem& sys,
                                               int limit = 8);

// Deterministic uniform orders; sample i is drawn from its own counter-based
// stream, so any subset can be regenerated independently of batch layout.
std::vector<Permutation> sample_orders(int n, int count, std::uint64_t seed);

struct NamedOrder {
    std::string name;
    Permutation order;
};

// Stress set for even n: natural, reversed, evens-first, odds-first,
// interleave-reversed.
std::vector<NamedOrder> adversarial_orders(int n);

}  // namespace mbasis
