#include "mbasis/epsilon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace mbasis {

EpsilonSequence EpsilonSequence::from_values(std::vector<double> values,
                                             NormalizationLog log) {
    if (values.empty()) throw ValidationError("epsilon sequence is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw ValidationError("epsilon entry at index " + std::to_string(i + 1) +
                                  " is not strictly positive");
        if (i > 0 && values[i] > values[i - 1])
            throw ValidationError("epsilon sequence not non-increasing at index " +
                                  std::to_string(i + 1));
    }
    EpsilonSequence seq;
    seq.values_ = std::move(values);
    seq.log_ = std::move(log);
    return seq;
}

double EpsilonSequence::at(int n) const {
    if (n < 1 || n > size())
        throw ValidationError("epsilon index " + std::to_string(n) +
                              " out of range 1.." + std::to_string(size()));
    return values_[static_cast<std::size_t>(n) - 1];
}

EpsilonSequence normalize_eps(const std::vector<double>& raw, NormalizePolicy policy) {
    if (raw.empty()) throw ValidationError("epsilon sequence is empty");

    if (policy == NormalizePolicy::strict) {
        return EpsilonSequence::from_values(raw);
    }

    NormalizationLog log;
    std::vector<double> kept;
    kept.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = raw[i];
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("epsilon entry at index " + std::to_string(i + 1) +
                                  " is negative or non-finite");
        if (v == 0.0) {
            log.dropped_indices.push_back(static_cast<int>(i + 1));
        } else {
            kept.push_back(v);
        }
    }
    if (kept.empty())
        throw ValidationError("epsilon sequence has no positive entries");

    log.sorted = !std::is_sorted(kept.begin(), kept.end(), std::greater<double>());
    if (log.sorted)
        std::stable_sort(kept.begin(), kept.end(), std::greater<double>());
    return EpsilonSequence::from_values(std::move(kept), std::move(log));
}

namespace {

double parse_decimal(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ValidationError("cannot parse decimal literal '" + text + "'");
    return value;
}

}  // namespace

EpsilonSpec EpsilonSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ValidationError("epsilon spec '" + text +
                              "' must look like const:<v>, power:<p>, geometric:<r>, or file:<path>");
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);

    EpsilonSpec spec;
    spec.text_ = text;
    if (head == "const") {
        spec.kind_ = Kind::constant;
        spec.param_ = parse_decimal(tail);
        if (!(spec.param_ > 0.0))
            throw ValidationError("const epsilon value must be positive, got '" + tail + "'");
    } else if (head == "power") {
        spec.kind_ = Kind::power;
        spec.param_ = parse_decimal(tail);
        if (!(spec.param_ > 0.0))
            throw ValidationError("power exponent must be positive, got '" + tail + "'");
    } else if (head == "geometric") {
        spec.kind_ = Kind::geometric;
        spec.param_ = parse_decimal(tail);
        if (!(spec.param_ > 0.0))
            throw ValidationError("geometric ratio must be positive, got '" + tail + "'");
    } else if (head == "file") {
        spec.kind_ = Kind::file;
        std::ifstream in(tail);
        if (!in) throw ValidationError("cannot open epsilon file '" + tail + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            // trim whitespace; skip blank lines
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            const auto e = line.find_last_not_of(" \t\r");
            try {
                spec.file_values_.push_back(parse_decimal(line.substr(b, e - b + 1)));
            } catch (const ValidationError&) {
                throw ValidationError("cannot parse line " + std::to_string(lineno) +
                                      " of epsilon file '" + tail + "'");
            }
        }
        if (spec.file_values_.empty())
            throw ValidationError("epsilon file '" + tail + "' contains no values");
    } else {
        throw ValidationError("unknown epsilon spec kind '" + head + "'");
    }
    return spec;
}

std::vector<double> EpsilonSpec::raw(int count, int offset) const {
    if (count < 0 || offset < 0)
        throw ValidationError("epsilon request with negative count or offset");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    switch (kind_) {
        case Kind::constant:
            out.assign(static_cast<std::size_t>(count), param_);
            break;
        case Kind::power:
            for (int i = 1; i <= count; ++i)
                out.push_back(std::pow(static_cast<double>(offset + i), -param_));
            break;
        case Kind::geometric:
            for (int i = 1; i <= count; ++i)
                out.push_back(std::pow(param_, static_cast<double>(offset + i)));
            break;
        case Kind::file:
            if (offset + count > static_cast<int>(file_values_.size()))
                throw ValidationError("epsilon file supplies only " +
                                      std::to_string(file_values_.size()) + " values, requested " +
                                      std::to_string(offset + count));
            out.assign(file_values_.begin() + offset, file_values_.begin() + offset + count);
            break;
    }
    return out;
}

}  // namespace mbasis
