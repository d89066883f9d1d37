#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mbasis/analysis.hpp"
#include "mbasis/permutations.hpp"
#include "mbasis/system.hpp"

namespace mbasis {

// Vectors serialize as {"nnz": [[index, value], ...]} while at most half the
// coordinates are structural, and as a plain dense array otherwise. Readers
// accept both forms at any density.
nlohmann::json vector_to_json(const SparseVec& v);
SparseVec vector_from_json(const nlohmann::json& j, int dim);

nlohmann::json system_to_json(const BiorthogonalSystem& sys);
BiorthogonalSystem system_from_json(const nlohmann::json& j);

// Atomic file persistence (temp file + rename).
void save_system(const BiorthogonalSystem& sys, const std::string& path);
BiorthogonalSystem load_system(const std::string& path);
void atomic_write_text(const std::string& path, const std::string& content);

// FNV-1a over the canonical dump of a config object, "fnv1a:<hex>".
std::string config_fingerprint(const nlohmann::json& config);

nlohmann::json analysis_report_json(const AnalysisReport& report,
                                    const nlohmann::json& config);
std::string profile_csv(const std::vector<ProfileRow>& rows);

struct WitnessVerdict {
    bool w_ok = false;         // w_norm >= 2 C
    bool z_ok = false;         // z_norm <= 2
    bool identity_ok = false;  // || w - S_t z || <= tolerance
    bool odd_ok = false;       // every |<w, e_{2l-1}>| >= beta_{2l-1}/4
    bool passed() const { return w_ok && z_ok && identity_ok && odd_ok; }
};

WitnessVerdict witness_verdict(const WitnessResult& result, double target_C,
                               double identity_tol = 1e-9);

nlohmann::json witness_batch_json(const std::vector<std::pair<std::string, WitnessResult>>& rows,
                                  double target_C, const nlohmann::json& config);

std::string search_csv(const std::vector<OrderValue>& table);

}  // namespace mbasis
