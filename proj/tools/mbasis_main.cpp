#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "mbasis/analysis.hpp"
#include "mbasis/coefficients.hpp"
#include "mbasis/epsilon.hpp"
#include "mbasis/errors.hpp"
#include "mbasis/numeric.hpp"
#include "mbasis/permutations.hpp"
#include "mbasis/serialize.hpp"
#include "mbasis/system.hpp"
#include "mbasis/version.hpp"

namespace {

using namespace mbasis;

NormalizePolicy policy_from_string(const std::string& name) {
    if (name == "strict") return NormalizePolicy::strict;
    if (name == "drop_zeros_and_sort") return NormalizePolicy::drop_zeros_and_sort;
    throw ValidationError("unknown eps policy '" + name +
                          "' (expected strict or drop_zeros_and_sort)");
}

// Supply driver for the adaptive builders below. Raw terms are requested in
// growing batches; a batch whose normalized size stops improving means the
// spec has no more usable entries to offer.
struct EpsSupply {
    EpsilonSpec spec;
    NormalizePolicy policy = NormalizePolicy::drop_zeros_and_sort;

    EpsilonSequence materialize(int raw_count) const {
        return normalize_eps(spec.raw(std::min(raw_count, spec.available())), policy);
    }

    // Smallest batch whose normalized form has at least `need` entries.
    EpsilonSequence at_least(int need) const {
        int count = std::max(need, 16);
        int prev = -1;
        for (;;) {
            EpsilonSequence eps = materialize(count);
            if (eps.size() >= need) return eps;
            const bool grew = eps.size() > prev;
            if (!grew || count >= spec.available())
                throw ValidationError("epsilon spec '" + spec.text() + "' yields only " +
                                      std::to_string(eps.size()) +
                                      " usable entries but " + std::to_string(need) +
                                      " are needed");
            prev = eps.size();
            count = count > (1 << 30) ? spec.available() : count * 2;
        }
    }
};

int thread_budget() {
    if (const char* env = std::getenv("MBASIS_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed >= 1) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

Permutation parse_order(const std::string& text, int n) {
    if (text == "natural") return Permutation::natural(n);
    if (text == "reversed") {
        std::vector<int> images(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) images[static_cast<std::size_t>(i)] = n - i;
        return Permutation(images);
    }
    std::vector<int> images;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(',', pos);
        const std::string token =
            text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            images.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw ValidationError("cannot parse order entry '" + token + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (static_cast<int>(images.size()) != n)
        throw ValidationError("order has " + std::to_string(images.size()) +
                              " entries but the system has " + std::to_string(n));
    return Permutation(std::move(images));
}

struct ConstructCommon {
    std::string eps_spec;
    std::string eps_policy = "drop_zeros_and_sort";
    std::string duals = "projected";
    std::string out;
    int max_dim = 100'000;
};

void add_construct_common(CLI::App* cmd, ConstructCommon& c) {
    cmd->add_option("--eps", c.eps_spec, "bound sequence spec (const:v, power:p, geometric:r, file:path)")
        ->required();
    cmd->add_option("--eps-policy", c.eps_policy,
                    "input normalization: strict or drop_zeros_and_sort")
        ->check(CLI::IsMember({"strict", "drop_zeros_and_sort"}));
    cmd->add_option("--duals", c.duals, "dual family form: projected or raw")
        ->check(CLI::IsMember({"projected", "raw"}));
    cmd->add_option("-o,--out", c.out, "output system file")->required();
    cmd->add_option("--max-dim", c.max_dim, "ambient dimension guard")
        ->check(CLI::PositiveNumber);
}

void finish_construct(BiorthogonalSystem& sys, const ConstructCommon& c,
                      const nlohmann::json& extra_params) {
    sys.meta.params.update(extra_params);
    sys.meta.params["eps"] = c.eps_spec;
    sys.meta.params["eps_policy"] = c.eps_policy;
    const double residual = biorthogonality_residual(sys);
    save_system(sys, c.out);
    std::cout << "constructed " << sys.meta.builder << " n_vectors=" << sys.n_vectors
              << " ambient_dim=" << sys.ambient_dim << " residual=" << format_double(residual)
              << " -> " << c.out << "\n";
}

// Builds one permutation-resistant block, growing the raw supply while the
// selection scan keeps running off the end of the table.
Theorem2Build build_t2_adaptive(const EpsSupply& supply, double C, const BuildOptions& opts,
                                int& raw_count) {
    int prev_normalized = -1;
    for (;;) {
        const EpsilonSequence eps = supply.materialize(raw_count);
        try {
            return build_theorem2(eps, C, opts);
        } catch (const ScanError& e) {
            const int hard_cap = opts.scan_cap > (1 << 29) ? std::numeric_limits<int>::max()
                                                           : 2 * opts.scan_cap + 2;
            const bool supply_left = raw_count < std::min(supply.spec.available(), hard_cap);
            const bool grew = eps.size() > prev_normalized;
            if (!e.table_exhausted() || !supply_left || !grew)
                throw ScanError(std::string(e.what()) + " [epsilon spec '" +
                                    supply.spec.text() + "' offered " +
                                    std::to_string(eps.size()) + " usable entries]",
                                e.table_exhausted());
            prev_normalized = eps.size();
            raw_count = raw_count > (1 << 30) ? std::numeric_limits<int>::max()
                                              : raw_count * 2;
        }
    }
}

int cmd_construct_t1(const ConstructCommon& c, int n) {
    const EpsSupply supply{EpsilonSpec::parse(c.eps_spec), policy_from_string(c.eps_policy)};
    if (n + 1 > c.max_dim)
        throw DimensionError("ambient dimension " + std::to_string(n + 1) +
                             " exceeds max_dim " + std::to_string(c.max_dim));
    const EpsilonSequence eps = supply.at_least(n);
    BiorthogonalSystem sys = build_truncated(eps, n, dual_mode_from_string(c.duals));
    finish_construct(sys, c, {{"eps_count", eps.size()}});
    return 0;
}

int cmd_construct_t2(const ConstructCommon& c, double C, int scan_cap) {
    const EpsSupply supply{EpsilonSpec::parse(c.eps_spec), policy_from_string(c.eps_policy)};
    BuildOptions opts;
    opts.scan_cap = scan_cap;
    opts.max_dim = c.max_dim;
    opts.duals = dual_mode_from_string(c.duals);
    int raw_count = 4096;
    Theorem2Build built = build_t2_adaptive(supply, C, opts, raw_count);
    finish_construct(built.system, c, {{"eps_count", raw_count}});
    return 0;
}

int cmd_construct_blocks(const ConstructCommon& c, const std::vector<double>& c_list,
                         int scan_cap) {
    const EpsSupply supply{EpsilonSpec::parse(c.eps_spec), policy_from_string(c.eps_policy)};
    BuildOptions opts;
    opts.scan_cap = scan_cap;
    opts.max_dim = c.max_dim;
    opts.duals = dual_mode_from_string(c.duals);

    // Blocks consume consecutive segments of one normalized sequence, so any
    // growth of the raw supply restarts the whole chain: normalization may
    // reorder entries, and every block must see the final sequence.
    int raw_count = 4096;
    for (;;) {
        const EpsilonSequence eps_all = supply.materialize(raw_count);
        std::vector<BiorthogonalSystem> blocks;
        int offset = 0;
        bool grown = false;
        for (double target : c_list) {
            if (offset >= eps_all.size()) {
                grown = true;
                break;
            }
            const auto& all = eps_all.values();
            EpsilonSequence tail = EpsilonSequence::from_values(
                std::vector<double>(all.begin() + offset, all.end()));
            try {
                Theorem2Build built = build_theorem2(tail, target, opts);
                offset += built.params.N;
                blocks.push_back(std::move(built.system));
            } catch (const ScanError& e) {
                const int hard_cap = opts.scan_cap > (1 << 29)
                                         ? std::numeric_limits<int>::max()
                                         : 2 * opts.scan_cap + 2;
                const bool supply_left =
                    raw_count < std::min(supply.spec.available(), hard_cap);
                if (!e.table_exhausted() || !supply_left)
                    throw ScanError(std::string(e.what()) + " [block with C = " +
                                        format_double(target) + "]",
                                    e.table_exhausted());
                grown = true;
                break;
            }
        }
        if (grown) {
            const int next = raw_count > (1 << 30) ? std::numeric_limits<int>::max()
                                                   : raw_count * 2;
            if (std::min(next, supply.spec.available()) == raw_count)
                throw ValidationError("epsilon spec '" + c.eps_spec +
                                      "' cannot supply all requested blocks");
            raw_count = next;
            continue;
        }
        const auto& all = eps_all.values();
        EpsilonSequence eps_concat = EpsilonSequence::from_values(
            std::vector<double>(all.begin(), all.begin() + offset));
        BiorthogonalSystem sys = build_block_sum(blocks, eps_concat);
        finish_construct(sys, c, {{"eps_count", raw_count}, {"C_list", c_list}});
        return 0;
    }
}

int cmd_analyze(const std::string& input, double tol, const std::string& order_text,
                const std::string& out, const std::string& csv) {
    const BiorthogonalSystem sys = load_system(input);
    std::optional<Permutation> order;
    if (!order_text.empty()) order = parse_order(order_text, sys.n_vectors);
    const AnalysisReport report = analyze(sys, order);

    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& row : report.profile) min_margin = std::min(min_margin, row.margin);

    nlohmann::json config = {{"command", "analyze"}, {"input", input},         {"tol", tol},
                             {"order", order_text},  {"report", out},          {"csv", csv},
                             {"threads", 1},         {"tool_version", kVersion}};
    if (!out.empty())
        atomic_write_text(out, analysis_report_json(report, config).dump(1) + "\n");
    if (!csv.empty()) atomic_write_text(csv, profile_csv(report.profile));

    std::cout << "analyzed " << sys.meta.builder << " n_vectors=" << sys.n_vectors
              << " residual=" << format_double(report.biorthogonality_residual)
              << " min_margin=" << format_double(min_margin)
              << " frame_cond=" << format_double(report.frame.condition_number);
    if (report.basis_constant)
        std::cout << " basis_constant=" << format_double(report.basis_constant->value);
    if (!out.empty()) std::cout << " -> " << out;
    std::cout << "\n";

    const bool ok = report.biorthogonality_residual <= tol && min_margin >= -1e-9;
    return ok ? 0 : 1;
}

int cmd_witness(const std::string& input, int samples, std::uint64_t seed,
                const std::string& out) {
    const BiorthogonalSystem sys = load_system(input);
    if (!sys.meta.theorem2)
        throw ValidationError("system file '" + input +
                              "' lacks theorem2 metadata; witness needs a t2 build");
    const Theorem2Params& params = *sys.meta.theorem2;

    if (!sys.meta.params.contains("eps") || !sys.meta.params.contains("eps_policy") ||
        !sys.meta.params.contains("eps_count"))
        throw ValidationError("system file '" + input +
                              "' lacks the eps spec metadata needed to rebuild the "
                              "coefficient table");
    const EpsSupply supply{EpsilonSpec::parse(sys.meta.params.at("eps").get<std::string>()),
                           policy_from_string(
                               sys.meta.params.at("eps_policy").get<std::string>())};
    const EpsilonSequence eps =
        supply.materialize(sys.meta.params.at("eps_count").get<int>());
    if (eps.size() < params.N)
        throw ValidationError("epsilon spec in metadata yields fewer than N entries");
    const CoefficientTable table = CoefficientTable::build(eps, params.N);
    for (int n = 1; n <= params.N; ++n) {
        if (1.0 + table.eps(n) != sys.eps_bounds[static_cast<std::size_t>(n) - 1])
            throw ValidationError("stored bounds do not match the epsilon spec in "
                                  "metadata at index " + std::to_string(n));
    }

    std::vector<std::pair<std::string, Permutation>> orders;
    for (auto& named : adversarial_orders(params.N))
        orders.emplace_back(named.name, std::move(named.order));
    {
        std::vector<Permutation> sampled = sample_orders(params.N, samples, seed);
        for (std::size_t i = 0; i < sampled.size(); ++i)
            orders.emplace_back("sample:" + std::to_string(i), std::move(sampled[i]));
    }

    std::vector<std::pair<std::string, WitnessResult>> rows(orders.size());
    const int workers = std::min<int>(thread_budget(), static_cast<int>(orders.size()));
    std::atomic<std::size_t> cursor{0};
    auto run = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= orders.size()) return;
            rows[i] = {orders[i].first, witness(sys, params, table, orders[i].second)};
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    nlohmann::json config = {{"command", "witness"},
                             {"input", input},
                             {"samples", samples},
                             {"seed", seed},
                             {"report", out},
                             {"tool_version", kVersion}};
    const nlohmann::json report = witness_batch_json(rows, params.target_C, config);
    if (!out.empty()) atomic_write_text(out, report.dump(1) + "\n");

    const auto& summary = report.at("summary");
    const bool all_passed = summary.at("all_passed").get<bool>();
    std::cout << "witness orders=" << summary.at("orders_tested").get<int>()
              << " min_lower_bound=" << summary.at("min_lower_bound").dump()
              << " target_C=" << format_double(params.target_C)
              << " all_passed=" << (all_passed ? "true" : "false");
    if (!out.empty()) std::cout << " -> " << out;
    std::cout << "\n";
    return all_passed ? 0 : 1;
}

int cmd_search(const std::string& input, int limit, const std::string& out) {
    const BiorthogonalSystem sys = load_system(input);
    const ExhaustiveResult result = exhaustive_min_basis_constant(sys, limit);
    if (!out.empty()) atomic_write_text(out, search_csv(result.table));
    std::cout << "search n=" << sys.n_vectors << " orders=" << result.table.size()
              << " min=" << format_double(result.min_value)
              << " best=" << result.best_order.to_string();
    if (!out.empty()) std::cout << " -> " << out;
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biorthogonal system construction and verification"};
    app.set_version_flag("--version", std::string(mbasis::kVersion));
    app.require_subcommand(1);

    // construct
    auto* construct = app.add_subcommand("construct", "build a system and write it to disk");
    construct->require_subcommand(1);

    ConstructCommon t1_common;
    int t1_n = 0;
    auto* t1 = construct->add_subcommand("t1", "truncated almost-Auerbach family");
    add_construct_common(t1, t1_common);
    t1->add_option("--n", t1_n, "number of vectors")->required()->check(CLI::PositiveNumber);

    ConstructCommon t2_common;
    double t2_c = 0.0;
    int t2_scan_cap = 1'000'000;
    auto* t2 = construct->add_subcommand("t2", "permutation-resistant finite system");
    add_construct_common(t2, t2_common);
    t2->add_option("--c", t2_c, "target lower-bound constant C")
        ->required()
        ->check(CLI::PositiveNumber);
    t2->add_option("--scan-cap", t2_scan_cap, "selection scan cap")
        ->check(CLI::PositiveNumber);

    ConstructCommon blocks_common;
    std::vector<double> blocks_c;
    int blocks_scan_cap = 1'000'000;
    auto* blocks = construct->add_subcommand("blocks", "block sum of t2 systems");
    add_construct_common(blocks, blocks_common);
    blocks->add_option("--c", blocks_c, "comma-separated target constants, one per block")
        ->required()
        ->delimiter(',');
    blocks->add_option("--scan-cap", blocks_scan_cap, "selection scan cap")
        ->check(CLI::PositiveNumber);

    // analyze
    std::string an_input, an_order, an_out, an_csv;
    double an_tol = 1e-8;
    auto* an = app.add_subcommand("analyze", "verify invariants of a stored system");
    an->add_option("input", an_input, "system file")->required();
    an->add_option("--tol", an_tol, "biorthogonality residual tolerance")
        ->check(CLI::PositiveNumber);
    an->add_option("--basis-constant", an_order,
                   "compute the basis constant for this order (natural, reversed, or "
                   "comma-separated images)");
    an->add_option("-o,--out", an_out, "report JSON path");
    an->add_option("--csv", an_csv, "boundedness profile CSV path");

    // witness
    std::string wi_input, wi_out;
    int wi_samples = 200;
    std::uint64_t wi_seed = 0;
    auto* wi = app.add_subcommand("witness",
                                  "run the permuted-prefix witness over stress and "
                                  "sampled orders");
    wi->add_option("input", wi_input, "system file (t2 build)")->required();
    wi->add_option("--samples", wi_samples, "number of random orders")
        ->check(CLI::NonNegativeNumber);
    wi->add_option("--seed", wi_seed, "sampling seed");
    wi->add_option("-o,--out", wi_out, "batch report JSON path");

    // search
    std::string se_input, se_out;
    int se_limit = 8;
    auto* se = app.add_subcommand("search", "exhaustive basis constants over all orders");
    se->add_option("input", se_input, "system file")->required();
    se->add_option("--limit", se_limit, "largest n to enumerate")->check(CLI::PositiveNumber);
    se->add_option("-o,--out", se_out, "per-order CSV path");

    try {
        app.parse(argc, argv);
        if (t1->parsed()) return cmd_construct_t1(t1_common, t1_n);
        if (t2->parsed()) return cmd_construct_t2(t2_common, t2_c, t2_scan_cap);
        if (blocks->parsed())
            return cmd_construct_blocks(blocks_common, blocks_c, blocks_scan_cap);
        if (an->parsed()) return cmd_analyze(an_input, an_tol, an_order, an_out, an_csv);
        if (wi->parsed()) return cmd_witness(wi_input, wi_samples, wi_seed, wi_out);
        if (se->parsed()) return cmd_search(se_input, se_limit, se_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mbasis::ScanError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mbasis::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mbasis::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mbasis::SizeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mbasis::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
