#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fscale/rng.hpp"

namespace fscale {

// Row-major instance matrix with {+1,-1} labels.
struct Dataset {
    std::size_t cols = 0;
    std::vector<double> x;   // rows * cols
    std::vector<int> y;      // +1 / -1
    std::vector<std::string> feature_names;

    std::size_t rows() const { return cols ? x.size() / cols : 0; }

    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * cols, cols};
    }

    void add_row(std::span<const double> r, int label) {
        if (cols == 0) cols = r.size();
        if (r.size() != cols) throw std::invalid_argument("row width mismatch");
        x.insert(x.end(), r.begin(), r.end());
        y.push_back(label);
    }

    void validate() const {
        if (cols == 0 || rows() == 0) throw std::invalid_argument("empty dataset");
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
        bool pos = false, neg = false;
        for (int lab : y) {
            if (lab == 1) pos = true;
            else if (lab == -1) neg = true;
            else throw std::invalid_argument("label must be +1 or -1");
        }
        if (!pos || !neg) throw std::invalid_argument("training set has a single class");
    }

    // Column-subset view materialized as a new dataset.
    Dataset select_columns(const std::vector<std::size_t>& idx) const {
        Dataset d;
        d.cols = idx.size();
        d.x.reserve(rows() * idx.size());
        d.y = y;
        for (std::size_t j : idx) {
            if (j >= cols) throw std::out_of_range("column index out of range");
            if (j < feature_names.size()) d.feature_names.push_back(feature_names[j]);
        }
        for (std::size_t i = 0; i < rows(); ++i) {
            auto r = row(i);
            for (std::size_t j : idx) d.x.push_back(r[j]);
        }
        return d;
    }

    Dataset select_rows(const std::vector<std::size_t>& idx) const {
        Dataset d;
        d.cols = cols;
        d.feature_names = feature_names;
        for (std::size_t i : idx) d.add_row(row(i), y[i]);
        return d;
    }
};

// Seeded stratified fold assignment; returns fold index per row.
inline std::vector<std::size_t> stratified_folds(const Dataset& d, std::size_t folds,
                                                 std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    std::vector<std::size_t> assign(d.rows());
    Rng rng(seed);
    for (int cls : {1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d.rows(); ++i)
            if (d.y[i] == cls) idx.push_back(i);
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = rng() % i;
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t k = 0; k < idx.size(); ++k) assign[idx[k]] = k % folds;
    }
    return assign;
}

}  // namespace fscale
