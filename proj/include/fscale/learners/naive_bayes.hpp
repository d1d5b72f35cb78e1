#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fscale/learners/dataset.hpp"

namespace fscale {

// Gaussian naive Bayes with a per-feature variance floor.
class GaussianNB {
public:
    static constexpr double kVarFloor = 1e-9;

    // index 0 = positive class (+1), 1 = negative class (-1)
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> mean[2], var[2];

    void fit(const Dataset& d) {
        std::size_t n[2] = {0, 0};
        for (int c = 0; c < 2; ++c) {
            mean[c].assign(d.cols, 0.0);
            var[c].assign(d.cols, 0.0);
        }
        for (std::size_t i = 0; i < d.rows(); ++i) {
            int c = d.y[i] == 1 ? 0 : 1;
            ++n[c];
            auto r = d.row(i);
            for (std::size_t j = 0; j < d.cols; ++j) mean[c][j] += r[j];
        }
        for (int c = 0; c < 2; ++c)
            for (double& m : mean[c]) m /= static_cast<double>(n[c]);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            int c = d.y[i] == 1 ? 0 : 1;
            auto r = d.row(i);
            for (std::size_t j = 0; j < d.cols; ++j) {
                double diff = r[j] - mean[c][j];
                var[c][j] += diff * diff;
            }
        }
        for (int c = 0; c < 2; ++c) {
            for (double& v : var[c]) v = std::max(v / static_cast<double>(n[c]), kVarFloor);
            log_prior[c] = std::log(static_cast<double>(n[c]) / static_cast<double>(d.rows()));
        }
    }

    double predict_proba(std::span<const double> x) const {
        double lj[2];
        for (int c = 0; c < 2; ++c) {
            lj[c] = log_prior[c];
            for (std::size_t j = 0; j < x.size(); ++j) {
                double diff = x[j] - mean[c][j];
                lj[c] -= 0.5 * (std::log(2.0 * M_PI * var[c][j]) + diff * diff / var[c][j]);
            }
        }
        double m = std::max(lj[0], lj[1]);
        double p0 = std::exp(lj[0] - m);
        return p0 / (p0 + std::exp(lj[1] - m));
    }

    // Per-feature symmetric KL between the two class-conditional Gaussians.
    std::vector<double> raw_importance() const {
        std::vector<double> w(mean[0].size());
        for (std::size_t j = 0; j < w.size(); ++j) {
            double d2 = (mean[0][j] - mean[1][j]) * (mean[0][j] - mean[1][j]);
            w[j] = 0.5 * ((var[0][j] + d2) / var[1][j] + (var[1][j] + d2) / var[0][j]) - 1.0;
        }
        return w;
    }
};

}  // namespace fscale
