#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fscale/learners/dataset.hpp"

namespace fscale {

// Full-batch gradient descent on L2-regularized logistic loss. Features
// are standardized internally (the transform is part of the model) so raw
// count/time scales do not wreck the step size.
class LogisticRegression {
public:
    struct Hyper {
        double l2 = 1e-4;
        double learning_rate = 0.5;
        std::size_t max_epochs = 500;
        double grad_tol = 1e-6;
    };

    std::vector<double> weights;  // in standardized space
    double bias = 0.0;
    std::vector<double> mean, scale;
    Hyper hyper;

    // mean log-loss + l2 * ||w||^2 over standardized rows
    static double loss(std::span<const double> w, double b, const Dataset& d, double l2) {
        double total = 0.0;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            auto r = d.row(i);
            double z = b;
            for (std::size_t j = 0; j < d.cols; ++j) z += w[j] * r[j];
            double m = -static_cast<double>(d.y[i]) * z;
            // log(1+e^m), stable
            total += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        }
        double reg = 0.0;
        for (double wj : w) reg += wj * wj;
        return total / static_cast<double>(d.rows()) + l2 * reg;
    }

    static void gradient(std::span<const double> w, double b, const Dataset& d, double l2,
                         std::span<double> gw, double& gb) {
        std::fill(gw.begin(), gw.end(), 0.0);
        gb = 0.0;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            auto r = d.row(i);
            double yi = static_cast<double>(d.y[i]);
            double z = b;
            for (std::size_t j = 0; j < d.cols; ++j) z += w[j] * r[j];
            double s = 1.0 / (1.0 + std::exp(yi * z));  // sigma(-y z)
            for (std::size_t j = 0; j < d.cols; ++j) gw[j] -= yi * r[j] * s;
            gb -= yi * s;
        }
        double n = static_cast<double>(d.rows());
        for (std::size_t j = 0; j < d.cols; ++j) gw[j] = gw[j] / n + 2.0 * l2 * w[j];
        gb /= n;
    }

    void fit(const Dataset& d, const Hyper& h) {
        hyper = h;
        standardize_params(d);
        Dataset sd = standardized(d);
        weights.assign(d.cols, 0.0);
        bias = 0.0;
        std::vector<double> gw(d.cols);
        double gb = 0.0;
        for (std::size_t epoch = 0; epoch < h.max_epochs; ++epoch) {
            gradient(weights, bias, sd, h.l2, gw, gb);
            double gmax = std::abs(gb);
            for (double gj : gw) gmax = std::max(gmax, std::abs(gj));
            if (gmax < h.grad_tol) break;
            for (std::size_t j = 0; j < d.cols; ++j) weights[j] -= h.learning_rate * gw[j];
            bias -= h.learning_rate * gb;
        }
    }

    double predict_proba(std::span<const double> x) const {
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j)
            z += weights[j] * (x[j] - mean[j]) / scale[j];
        return 1.0 / (1.0 + std::exp(-z));
    }

    // |coefficients| mapped back to raw feature scale.
    std::vector<double> raw_importance() const {
        std::vector<double> w(weights.size());
        for (std::size_t j = 0; j < weights.size(); ++j)
            w[j] = std::abs(weights[j] / scale[j]);
        return w;
    }

    Dataset standardized(const Dataset& d) const {
        Dataset sd = d;
        for (std::size_t i = 0; i < d.rows(); ++i)
            for (std::size_t j = 0; j < d.cols; ++j)
                sd.x[i * d.cols + j] = (d.x[i * d.cols + j] - mean[j]) / scale[j];
        return sd;
    }

private:
    void standardize_params(const Dataset& d) {
        double n = static_cast<double>(d.rows());
        mean.assign(d.cols, 0.0);
        scale.assign(d.cols, 0.0);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            auto r = d.row(i);
            for (std::size_t j = 0; j < d.cols; ++j) mean[j] += r[j];
        }
        for (double& m : mean) m /= n;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            auto r = d.row(i);
            for (std::size_t j = 0; j < d.cols; ++j) {
                double c = r[j] - mean[j];
                scale[j] += c * c;
            }
        }
        for (double& s : scale) s = std::max(std::sqrt(s / n), 1e-12);
    }
};

}  // namespace fscale
