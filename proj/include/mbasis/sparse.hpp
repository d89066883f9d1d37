#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <utility>
#include <vector>

#include "mbasis/errors.hpp"
#include "mbasis/numeric.hpp"

namespace mbasis {

// Ambient vector stored as sorted (index, value) pairs. Coordinate 0 is the
// distinguished direction, coordinate n (n >= 1) the n-th regular direction.
// Entries are structural: builders insert exactly the coordinates their
// formulas touch, so "is this coordinate present" is meaningful.
class SparseVec {
public:
    SparseVec() = default;
    SparseVec(int dim, std::vector<std::pair<int, double>> entries)
        : dim_(dim), entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const int idx = entries_[i].first;
            if (idx < 0 || idx >= dim_)
                throw ValidationError("sparse entry index " + std::to_string(idx) +
                                      " outside ambient dimension " + std::to_string(dim_));
            if (i > 0 && entries_[i - 1].first == idx)
                throw ValidationError("duplicate sparse entry index " + std::to_string(idx));
        }
    }

    static SparseVec unit(int dim, int index) { return SparseVec(dim, {{index, 1.0}}); }

    static SparseVec from_dense(const Eigen::VectorXd& v) {
        std::vector<std::pair<int, double>> entries;
        for (int i = 0; i < v.size(); ++i)
            if (v[i] != 0.0) entries.emplace_back(i, v[i]);
        return SparseVec(static_cast<int>(v.size()), std::move(entries));
    }

    int dim() const { return dim_; }
    int nnz_count() const { return static_cast<int>(entries_.size()); }
    const std::vector<std::pair<int, double>>& entries() const { return entries_; }

    double coord(int index) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                   [](const auto& e, int i) { return e.first < i; });
        return (it != entries_.end() && it->first == index) ? it->second : 0.0;
    }

    bool has_coord(int index) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                   [](const auto& e, int i) { return e.first < i; });
        return it != entries_.end() && it->first == index;
    }

    double dot(const SparseVec& other) const {
        NeumaierSum acc;
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() && b != other.entries_.end()) {
            if (a->first < b->first) {
                ++a;
            } else if (b->first < a->first) {
                ++b;
            } else {
                acc.add(a->second * b->second);
                ++a;
                ++b;
            }
        }
        return acc.value();
    }

    double dot(const Eigen::VectorXd& dense) const {
        NeumaierSum acc;
        for (const auto& [i, v] : entries_) acc.add(v * dense[i]);
        return acc.value();
    }

    double squared_norm() const {
        NeumaierSum acc;
        for (const auto& [i, v] : entries_) acc.add(v * v);
        return acc.value();
    }

    double norm() const { return std::sqrt(squared_norm()); }

    // acc += a * this
    void axpy_into(double a, Eigen::VectorXd& acc) const {
        for (const auto& [i, v] : entries_) acc[i] += a * v;
    }

    Eigen::VectorXd dense() const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
        for (const auto& [i, val] : entries_) v[i] = val;
        return v;
    }

    // Same vector re-embedded into a larger ambient space at a coordinate offset.
    SparseVec shifted(int offset, int new_dim) const {
        std::vector<std::pair<int, double>> entries;
        entries.reserve(entries_.size());
        for (const auto& [i, v] : entries_) entries.emplace_back(i + offset, v);
        return SparseVec(new_dim, std::move(entries));
    }

private:
    int dim_ = 0;
    std::vector<std::pair<int, double>> entries_;
};

}  // namespace mbasis
