#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "mbasis/errors.hpp"

namespace mbasis {

// Bijection on {1..n} stored as the array of images: image(m) is the vector
// index placed at position m.
class Permutation {
public:
    Permutation() = default;

    explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
        std::vector<int> sorted = images_;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
            if (sorted[static_cast<std::size_t>(i)] != i + 1)
                throw ValidationError("permutation is not a bijection on 1.." +
                                      std::to_string(images_.size()));
        }
    }

    static Permutation natural(int n) {
        std::vector<int> images(static_cast<std::size_t>(n));
        std::iota(images.begin(), images.end(), 1);
        return Permutation(std::move(images));
    }

    int size() const { return static_cast<int>(images_.size()); }

    int image(int pos) const {  // 1-based position
        if (pos < 1 || pos > size())
            throw ValidationError("permutation position " + std::to_string(pos) +
                                  " out of range 1.." + std::to_string(size()));
        return images_[static_cast<std::size_t>(pos) - 1];
    }

    const std::vector<int>& images() const { return images_; }

    bool operator==(const Permutation& other) const = default;

    std::string to_string(char sep = '-') const {
        std::string out;
        for (std::size_t i = 0; i < images_.size(); ++i) {
            if (i) out += sep;
            out += std::to_string(images_[i]);
        }
        return out;
    }

private:
    std::vector<int> images_;
};

}  // namespace mbasis
