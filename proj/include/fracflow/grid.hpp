#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracflow {

// Node values of a grid function; dimension and metric live in InnerProduct.
using StateVector = std::vector<double>;

// Uniform partition of [0, T] into N cells. Nodes t_n = n * tau().
class TimeGrid {
public:
    TimeGrid(double T, std::size_t N) : T_(T), N_(N) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (N == 0) throw std::invalid_argument("TimeGrid: need at least one cell");
    }

    double horizon() const { return T_; }
    std::size_t cells() const { return N_; }
    double tau() const { return T_ / static_cast<double>(N_); }
    double node(std::size_t n) const { return tau() * static_cast<double>(n); }

private:
    double T_;
    std::size_t N_;
};

// Weighted Euclidean metric <x, y> = weight * sum_i x_i y_i.
// weight = h for spatial grid functions, 1 for plain coordinate vectors.
struct InnerProduct {
    std::size_t dim = 1;
    double weight = 1.0;

    double dot(std::span<const double> x, std::span<const double> y) const {
        if (x.size() != dim || y.size() != dim)
            throw std::invalid_argument("InnerProduct: dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += x[i] * y[i];
        return weight * s;
    }

    double norm(std::span<const double> x) const { return std::sqrt(dot(x, x)); }
};

inline void axpy(double a, const StateVector& x, StateVector& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline StateVector scaled(const StateVector& x, double a) {
    StateVector y(x);
    for (double& v : y) v *= a;
    return y;
}

inline StateVector diff(const StateVector& x, const StateVector& y) {
    StateVector d(x);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= y[i];
    return d;
}

}  // namespace fracflow
