#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mbasis/errors.hpp"

namespace mbasis {

enum class NormalizePolicy {
    strict,              // input must already be positive and non-increasing
    drop_zeros_and_sort  // remove zeros, then sort non-increasing
};

struct NormalizationLog {
    std::vector<int> dropped_indices;  // 1-based positions removed from the raw input
    bool sorted = false;               // whether sorting changed the order
};

// Positive, non-increasing bound sequence. The log records how the raw input
// was massaged so that builders can re-insert orthonormal padding at the
// dropped or reordered slots later.
class EpsilonSequence {
public:
    EpsilonSequence() = default;

    // Validates positivity and monotonicity; throws ValidationError naming the
    // offending 1-based index otherwise.
    static EpsilonSequence from_values(std::vector<double> values,
                                       NormalizationLog log = {});

    int size() const { return static_cast<int>(values_.size()); }
    double at(int n) const;  // 1-based
    const std::vector<double>& values() const { return values_; }
    const NormalizationLog& log() const { return log_; }

private:
    std::vector<double> values_;
    NormalizationLog log_;
};

EpsilonSequence normalize_eps(const std::vector<double>& raw, NormalizePolicy policy);

// Bound-sequence mini-language:
//   const:<v>       eps_n = v
//   power:<p>       eps_n = n^(-p)
//   geometric:<r>   eps_n = r^n
//   file:<path>     one decimal value per line
// Decimal literals parse to the nearest binary64 exactly.
class EpsilonSpec {
public:
    enum class Kind { constant, power, geometric, file };

    static EpsilonSpec parse(const std::string& text);

    Kind kind() const { return kind_; }
    const std::string& text() const { return text_; }

    // The generator kinds can produce arbitrarily many terms; file specs cannot.
    bool unbounded_supply() const { return kind_ != Kind::file; }

    // Largest raw count a single request may ask for.
    int available() const {
        return unbounded_supply() ? std::numeric_limits<int>::max()
                                  : static_cast<int>(file_values_.size());
    }

    // Raw terms eps_{offset+1} .. eps_{offset+count}, before normalization.
    std::vector<double> raw(int count, int offset = 0) const;

private:
    Kind kind_ = Kind::constant;
    double param_ = 1.0;
    std::vector<double> file_values_;
    std::string text_;
};

}  // namespace mbasis
