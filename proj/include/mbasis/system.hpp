#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mbasis/coefficients.hpp"
#include "mbasis/epsilon.hpp"
#include "mbasis/errors.hpp"
#include "mbasis/sparse.hpp"

namespace mbasis {

// How the dual family of a truncated system is produced. The projected form
// is the default: raw y-vectors are replaced by their orthogonal projections
// onto span(primal), which keeps biorthogonality and can only shrink norms.
// The raw form keeps the y-vectors untouched; it is the right input for
// support-pattern diagnostics, where the exact zero coordinates matter.
enum class DualMode { projected, raw };

std::string to_string(DualMode mode);
DualMode dual_mode_from_string(const std::string& name);

struct SystemMeta {
    std::string builder;  // "truncated", "theorem2", "block_sum", "orthonormal", "padded"
    nlohmann::json params = nlohmann::json::object();
    std::optional<Theorem2Params> theorem2;
};

// Finite biorthogonal family in explicit coordinates. Convention for the
// constructed families: coordinate 0 carries the distinguished direction
// (written frak_e in reports), coordinate n carries e_n.
struct BiorthogonalSystem {
    int ambient_dim = 0;
    int n_vectors = 0;
    std::vector<SparseVec> primal;      // primal[i] is vector i+1
    std::vector<SparseVec> dual;
    std::vector<double> eps_bounds;     // per-index product targets, 1 + eps_n
    SystemMeta meta;

    const SparseVec& x(int n) const { return primal[static_cast<std::size_t>(checked(n)) - 1]; }
    const SparseVec& xdual(int n) const { return dual[static_cast<std::size_t>(checked(n)) - 1]; }
    double bound(int n) const { return eps_bounds[static_cast<std::size_t>(checked(n)) - 1]; }

    // Structural coherence: counts, dimensions, bound list length.
    void validate() const;

private:
    int checked(int n) const;
};

struct BuildOptions {
    int scan_cap = 1'000'000;
    int max_dim = 100'000;
    DualMode duals = DualMode::projected;
};

// Orthonormal self-dual family spanning R^n, eps_bounds all exactly 1.
BiorthogonalSystem make_orthonormal(int n);

// Truncation of the almost-Auerbach family to its first N vectors, living in
// ambient dimension N+1. Primal vectors follow the closed forms
//   x_{2l-1} = e_{2l-1}
//   x_{2k}   = beta_{2k} frak_e + e_{2k} - sum_{l<=k} beta_{2k} beta_{2l-1} e_{2l-1}
// and the raw duals
//   y_{2l-1} = beta_{2l-1} frak_e + e_{2l-1} - sum_{k<l} beta_{2l-1} beta_{2k} e_{2k}
//   y_{2k}   = e_{2k}.
BiorthogonalSystem build_truncated(const EpsilonSequence& eps, int N,
                                   DualMode mode = DualMode::projected);

struct Theorem2Build {
    BiorthogonalSystem system;
    Theorem2Params params;
};

// Permutation-resistant build: selects L and M for the target constant C,
// truncates at N = 2M, and attaches the witness data (gamma, z, fingerprint).
Theorem2Build build_theorem2(const EpsilonSequence& eps, double C,
                             const BuildOptions& opts = {});

// Orthogonal projection of each raw dual onto span(primal), computed through
// an orthonormal basis of that span. Throws ConditioningError when the primal
// family is numerically rank-deficient (sigma_min <= 1e-10 sigma_max).
std::vector<SparseVec> dual_via_projection(const std::vector<SparseVec>& primal,
                                           const std::vector<SparseVec>& raw_duals);

// Block-diagonal direct sum. eps_concat must be exactly the concatenation of
// the blocks' bound sequences; per-block coordinate offsets land in meta.
BiorthogonalSystem build_block_sum(const std::vector<BiorthogonalSystem>& blocks,
                                   const EpsilonSequence& eps_concat);

// Inserts K fresh orthonormal self-dual directions at the given 1-based
// result positions. The new coordinates are appended after the existing
// ambient axes, so the original block is untouched. eps_values, when given,
// assigns an eps bound to each padded slot (default 0: product is exactly 1).
BiorthogonalSystem pad_orthonormal(const BiorthogonalSystem& sys, int K,
                                   const std::vector<int>& positions,
                                   const std::vector<double>& eps_values = {});

}  // namespace mbasis
