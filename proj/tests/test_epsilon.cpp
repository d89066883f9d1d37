#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mbasis/epsilon.hpp"

using namespace mbasis;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("spec mini-language generates the advertised terms") {
    const EpsilonSpec constant = EpsilonSpec::parse("const:0.5");
    CHECK(constant.raw(3) == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(constant.unbounded_supply());

    const EpsilonSpec power = EpsilonSpec::parse("power:2");
    const auto p = power.raw(3);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.25);
    CHECK(p[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

    const EpsilonSpec geo = EpsilonSpec::parse("geometric:0.5");
    CHECK(geo.raw(3) == std::vector<double>{0.5, 0.25, 0.125});

    const auto offset = power.raw(2, 3);
    CHECK(offset[0] == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    CHECK(offset[1] == doctest::Approx(1.0 / 25.0).epsilon(1e-15));
}

TEST_CASE("spec parsing rejects malformed input") {
    CHECK_THROWS_AS(EpsilonSpec::parse("const"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("wedge:1"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("const:abc"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("const:0"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("const:-1"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("power:0"), ValidationError);
    CHECK_THROWS_AS(EpsilonSpec::parse("file:/nonexistent/eps.txt"), ValidationError);
}

TEST_CASE("file specs read one decimal per line and hold a finite supply") {
    const std::string path = write_temp("mbasis_eps_ok.txt", "1.0\n 0.5 \n\n0.25\n");
    const EpsilonSpec spec = EpsilonSpec::parse("file:" + path);
    CHECK_FALSE(spec.unbounded_supply());
    CHECK(spec.available() == 3);
    CHECK(spec.raw(3) == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(spec.raw(1, 2) == std::vector<double>{0.25});
    CHECK_THROWS_AS(spec.raw(4), ValidationError);

    const std::string bad = write_temp("mbasis_eps_bad.txt", "1.0\noops\n");
    CHECK_THROWS_WITH_AS(EpsilonSpec::parse("file:" + bad),
                         doctest::Contains("line 2"), ValidationError);

    const std::string empty = write_temp("mbasis_eps_empty.txt", "\n\n");
    CHECK_THROWS_AS(EpsilonSpec::parse("file:" + empty), ValidationError);
}

TEST_CASE("strict normalization is a checked passthrough") {
    const EpsilonSequence seq = normalize_eps({1.0, 1.0, 1.0}, NormalizePolicy::strict);
    CHECK(seq.size() == 3);
    CHECK(seq.at(1) == 1.0);
    CHECK(seq.log().dropped_indices.empty());
    CHECK_FALSE(seq.log().sorted);

    CHECK_THROWS_WITH_AS(normalize_eps({0.5, 1.0}, NormalizePolicy::strict),
                         doctest::Contains("not non-increasing at index 2"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(normalize_eps({1.0, 0.0}, NormalizePolicy::strict),
                         doctest::Contains("index 2"), ValidationError);
    CHECK_THROWS_AS(normalize_eps({-1.0}, NormalizePolicy::strict), ValidationError);
    CHECK_THROWS_AS(normalize_eps({}, NormalizePolicy::strict), ValidationError);
}

TEST_CASE("lenient normalization drops zeros and sorts, recording both") {
    const EpsilonSequence seq =
        normalize_eps({0.5, 0.0, 1.0}, NormalizePolicy::drop_zeros_and_sort);
    CHECK(seq.values() == std::vector<double>{1.0, 0.5});
    CHECK(seq.log().dropped_indices == std::vector<int>{2});
    CHECK(seq.log().sorted);

    const EpsilonSequence untouched =
        normalize_eps({1.0, 0.5}, NormalizePolicy::drop_zeros_and_sort);
    CHECK(untouched.log().dropped_indices.empty());
    CHECK_FALSE(untouched.log().sorted);

    // negatives are invalid under either policy
    CHECK_THROWS_AS(normalize_eps({1.0, -0.5}, NormalizePolicy::drop_zeros_and_sort),
                    ValidationError);
    CHECK_THROWS_AS(normalize_eps({0.0, 0.0}, NormalizePolicy::drop_zeros_and_sort),
                    ValidationError);
}

TEST_CASE("sequence accessors are 1-based and bounds-checked") {
    const EpsilonSequence seq = EpsilonSequence::from_values({1.0, 0.5});
    CHECK(seq.at(1) == 1.0);
    CHECK(seq.at(2) == 0.5);
    CHECK_THROWS_AS(seq.at(0), ValidationError);
    CHECK_THROWS_AS(seq.at(3), ValidationError);
    CHECK_THROWS_AS(EpsilonSequence::from_values({1.0, 2.0}), ValidationError);
}

TEST_CASE("geometric tails that underflow to zero are dropped, not kept") {
    const EpsilonSpec geo = EpsilonSpec::parse("geometric:0.5");
    const auto raw = geo.raw(1100);
    CHECK(raw[1073] > 0.0);   // smallest subnormal the ratio can reach
    CHECK(raw[1074] == 0.0);  // underflow past that
    const EpsilonSequence seq = normalize_eps(raw, NormalizePolicy::drop_zeros_and_sort);
    CHECK(seq.size() == 1074);
    CHECK_THROWS_AS(normalize_eps(raw, NormalizePolicy::strict), ValidationError);
}
