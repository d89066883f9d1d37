#include "mbasis/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mbasis/numeric.hpp"
#include "mbasis/version.hpp"

namespace mbasis {

namespace {

nlohmann::json json_real(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::uint64_t hash_from_string(const std::string& s) {
    const std::string prefix = "fnv1a:";
    if (s.rfind(prefix, 0) != 0)
        throw ValidationError("hash string '" + s + "' lacks the fnv1a: prefix");
    return std::stoull(s.substr(prefix.size()), nullptr, 16);
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(std::string("missing field '") + key + "'");
    return *it;
}

nlohmann::json theorem2_to_json(const Theorem2Params& p) {
    return {{"C", p.target_C},       {"L", p.L},
            {"M", p.M},              {"N", p.N},
            {"B", p.B},              {"gamma", p.gamma},
            {"z", vector_to_json(p.z_coords)},
            {"params_hash", format_hash(p.params_hash)}};
}

Theorem2Params theorem2_from_json(const nlohmann::json& j, int ambient_dim) {
    Theorem2Params p;
    p.target_C = field(j, "C").get<double>();
    p.L = field(j, "L").get<int>();
    p.M = field(j, "M").get<int>();
    p.N = field(j, "N").get<int>();
    p.B = field(j, "B").get<double>();
    p.gamma = field(j, "gamma").get<std::vector<double>>();
    p.z_coords = vector_from_json(field(j, "z"), ambient_dim);
    p.params_hash = hash_from_string(field(j, "params_hash").get<std::string>());
    if (p.N != 2 * p.M) throw ValidationError("theorem2 metadata violates N = 2M");
    if (static_cast<int>(p.gamma.size()) != p.N)
        throw ValidationError("theorem2 gamma length differs from N");
    return p;
}

}  // namespace

nlohmann::json vector_to_json(const SparseVec& v) {
    if (2 * v.nnz_count() <= v.dim()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [i, value] : v.entries()) entries.push_back({i, value});
        return {{"nnz", std::move(entries)}};
    }
    nlohmann::json dense = nlohmann::json::array();
    const Eigen::VectorXd d = v.dense();
    for (Eigen::Index i = 0; i < d.size(); ++i) dense.push_back(d(i));
    return dense;
}

SparseVec vector_from_json(const nlohmann::json& j, int dim) {
    if (j.is_array()) {
        if (static_cast<int>(j.size()) != dim)
            throw ValidationError("dense vector length " + std::to_string(j.size()) +
                                  " does not match dimension " + std::to_string(dim));
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d(i) = j[static_cast<std::size_t>(i)].get<double>();
        return SparseVec::from_dense(d);
    }
    if (j.is_object() && j.contains("nnz")) {
        std::vector<std::pair<int, double>> entries;
        for (const auto& e : j.at("nnz")) {
            if (!e.is_array() || e.size() != 2)
                throw ValidationError("sparse entry is not an [index, value] pair");
            entries.emplace_back(e[0].get<int>(), e[1].get<double>());
        }
        return SparseVec(dim, std::move(entries));
    }
    throw ValidationError("vector is neither a dense array nor an {\"nnz\": ...} object");
}

nlohmann::json system_to_json(const BiorthogonalSystem& sys) {
    nlohmann::json primal = nlohmann::json::array();
    nlohmann::json dual = nlohmann::json::array();
    for (const auto& v : sys.primal) primal.push_back(vector_to_json(v));
    for (const auto& v : sys.dual) dual.push_back(vector_to_json(v));

    nlohmann::json meta = {{"builder", sys.meta.builder}, {"params", sys.meta.params}};
    if (sys.meta.theorem2) meta["theorem2"] = theorem2_to_json(*sys.meta.theorem2);

    return {{"schema", kSystemSchema},
            {"ambient_dim", sys.ambient_dim},
            {"n_vectors", sys.n_vectors},
            {"coord_convention", "frak_e_at_0"},
            {"primal", std::move(primal)},
            {"dual", std::move(dual)},
            {"eps_bounds", sys.eps_bounds},
            {"meta", std::move(meta)}};
}

BiorthogonalSystem system_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("system document is not a JSON object");
    const std::string schema = field(j, "schema").get<std::string>();
    if (schema != kSystemSchema)
        throw ValidationError("unsupported schema '" + schema + "' (expected " +
                              std::string(kSystemSchema) + ")");
    const std::string convention = field(j, "coord_convention").get<std::string>();
    if (convention != "frak_e_at_0")
        throw ValidationError("unknown coordinate convention '" + convention + "'");

    BiorthogonalSystem sys;
    sys.ambient_dim = field(j, "ambient_dim").get<int>();
    sys.n_vectors = field(j, "n_vectors").get<int>();
    for (const auto& v : field(j, "primal"))
        sys.primal.push_back(vector_from_json(v, sys.ambient_dim));
    for (const auto& v : field(j, "dual"))
        sys.dual.push_back(vector_from_json(v, sys.ambient_dim));
    sys.eps_bounds = field(j, "eps_bounds").get<std::vector<double>>();

    const nlohmann::json& meta = field(j, "meta");
    sys.meta.builder = field(meta, "builder").get<std::string>();
    sys.meta.params = field(meta, "params");
    if (meta.contains("theorem2"))
        sys.meta.theorem2 = theorem2_from_json(meta.at("theorem2"), sys.ambient_dim);

    sys.validate();
    return sys;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw ValidationError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ValidationError("cannot move temporary file onto '" + path + "': " +
                              ec.message());
    }
}

void save_system(const BiorthogonalSystem& sys, const std::string& path) {
    atomic_write_text(path, system_to_json(sys).dump(1) + "\n");
}

BiorthogonalSystem load_system(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read system file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed system file '" + path + "': " + e.what());
    }
    try {
        return system_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError("system file '" + path + "': " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("system file '" + path + "': " + e.what());
    }
}

std::string config_fingerprint(const nlohmann::json& config) {
    const std::string canonical = config.dump();
    return format_hash(fnv1a_bytes(canonical.data(), canonical.size()));
}

nlohmann::json analysis_report_json(const AnalysisReport& report,
                                    const nlohmann::json& config) {
    nlohmann::json profile = nlohmann::json::array();
    for (const auto& row : report.profile)
        profile.push_back({{"n", row.n},
                           {"norm_x", row.norm_x},
                           {"norm_dual", row.norm_dual},
                           {"product", row.product},
                           {"bound", row.bound},
                           {"margin", row.margin}});
    nlohmann::json out = {
        {"schema", kReportSchema},
        {"kind", "analysis"},
        {"tool_version", kVersion},
        {"config", config},
        {"config_hash", config_fingerprint(config)},
        {"biorthogonality_residual", report.biorthogonality_residual},
        {"frame",
         {{"sigma_min_sq", json_real(report.frame.sigma_min_sq)},
          {"sigma_max_sq", json_real(report.frame.sigma_max_sq)},
          {"condition_number", json_real(report.frame.condition_number)}}},
        {"profile", std::move(profile)}};
    if (report.basis_constant)
        out["basis_constant"] = {{"order", report.basis_constant->order.to_string()},
                                 {"value", report.basis_constant->value}};
    return out;
}

std::string profile_csv(const std::vector<ProfileRow>& rows) {
    std::string out = "n,norm_x,norm_dual,product,bound,margin\n";
    for (const auto& row : rows) {
        out += std::to_string(row.n);
        out += ',';
        out += format_double(row.norm_x);
        out += ',';
        out += format_double(row.norm_dual);
        out += ',';
        out += format_double(row.product);
        out += ',';
        out += format_double(row.bound);
        out += ',';
        out += format_double(row.margin);
        out += '\n';
    }
    return out;
}

WitnessVerdict witness_verdict(const WitnessResult& result, double target_C,
                               double identity_tol) {
    WitnessVerdict v;
    v.w_ok = result.w_norm >= 2.0 * target_C;
    v.z_ok = result.z_norm <= 2.0;
    v.identity_ok = result.identity_error <= identity_tol;
    v.odd_ok = result.min_odd_margin >= 0.0;
    return v;
}

nlohmann::json witness_batch_json(const std::vector<std::pair<std::string, WitnessResult>>& rows,
                                  double target_C, const nlohmann::json& config) {
    nlohmann::json out_rows = nlohmann::json::array();
    bool all_passed = !rows.empty();
    double min_lower = std::numeric_limits<double>::infinity();
    int order_id = 0;
    for (const auto& [name, result] : rows) {
        const WitnessVerdict verdict = witness_verdict(result, target_C);
        all_passed = all_passed && verdict.passed();
        min_lower = std::min(min_lower, result.lower_bound);
        out_rows.push_back({{"order_id", order_id++},
                            {"seed_or_name", name},
                            {"t", result.t},
                            {"w_norm", result.w_norm},
                            {"z_norm", result.z_norm},
                            {"lower_bound", result.lower_bound},
                            {"min_odd_margin", result.min_odd_margin},
                            {"identity_error", result.identity_error},
                            {"passed", verdict.passed()}});
    }
    return {{"schema", kReportSchema},
            {"kind", "witness_batch"},
            {"tool_version", kVersion},
            {"config", config},
            {"config_hash", config_fingerprint(config)},
            {"target_C", target_C},
            {"rows", std::move(out_rows)},
            {"summary",
             {{"orders_tested", static_cast<int>(rows.size())},
              {"min_lower_bound", json_real(min_lower)},
              {"all_passed", all_passed}}}};
}

std::string search_csv(const std::vector<OrderValue>& table) {
    std::string out = "order_id,order,basis_constant\n";
    int order_id = 0;
    for (const auto& entry : table) {
        out += std::to_string(order_id++);
        out += ',';
        out += entry.order.to_string();
        out += ',';
        out += format_double(entry.value);
        out += '\n';
    }
    return out;
}

}  // namespace mbasis
