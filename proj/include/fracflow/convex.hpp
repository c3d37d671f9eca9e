#pragma once

#include <limits>
#include <memory>
#include <stdexcept>

#include "fracflow/grid.hpp"

namespace fracflow {

// Minimizer of (1/2 lambda)||w - z||^2 + phi^t(w) together with the
// subgradient xi = (z - w)/lambda realized at it.
struct ProxResult {
    StateVector w;
    StateVector xi;
};

// Proper convex lower semicontinuous energy, possibly time dependent.
// eval may return +infinity outside the domain. prox must be exact up to the
// implementation's inner tolerance; xi is always (z - w)/lambda.
class Energy {
public:
    virtual ~Energy() = default;

    virtual const InnerProduct& space() const = 0;
    virtual double eval(double t, const StateVector& w) const = 0;
    virtual ProxResult prox(double t, double lambda, const StateVector& z) const = 0;

    virtual bool autonomous() const { return true; }
    virtual bool nonnegative() const { return false; }

    // Measurable-in-time map carrying domain elements between time slices.
    virtual bool has_shift_map() const { return false; }
    virtual StateVector shift_map(double /*t*/, double /*s*/, const StateVector& /*w*/) const {
        throw std::logic_error("Energy: no shift map available");
    }

protected:
    static void require_lambda(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("Energy: prox step must be positive");
    }
    static constexpr double infinity = std::numeric_limits<double>::infinity();
};

// Envelope value inf_w [ (1/2 lambda)||w - z||^2 + phi^t(w) ], evaluated at
// the prox point. Monotone nondecreasing as lambda decreases, sandwiched
// between phi(prox) and phi(z).
double moreau_value(const Energy& phi, double t, double lambda, const StateVector& z);

// (a/2)||w||^2; prox is damping by 1/(1 + lambda a).
class QuadraticEnergy final : public Energy {
public:
    explicit QuadraticEnergy(InnerProduct space, double a = 1.0) : space_(space), a_(a) {
        if (!(a > 0.0)) throw std::invalid_argument("QuadraticEnergy: coefficient must be positive");
    }
    const InnerProduct& space() const override { return space_; }
    double eval(double t, const StateVector& w) const override;
    ProxResult prox(double t, double lambda, const StateVector& z) const override;
    bool nonnegative() const override { return true; }

private:
    InnerProduct space_;
    double a_;
};

// |u| on the line; prox is soft thresholding.
class AbsValueEnergy final : public Energy {
public:
    AbsValueEnergy() : space_{1, 1.0} {}
    const InnerProduct& space() const override { return space_; }
    double eval(double t, const StateVector& w) const override;
    ProxResult prox(double t, double lambda, const StateVector& z) const override;
    bool nonnegative() const override { return true; }

private:
    InnerProduct space_;
};

// Indicator of the origin; prox collapses to zero and xi = z/lambda.
class ZeroConstraintEnergy final : public Energy {
public:
    explicit ZeroConstraintEnergy(InnerProduct space) : space_(space) {}
    const InnerProduct& space() const override { return space_; }
    double eval(double t, const StateVector& w) const override;
    ProxResult prox(double t, double lambda, const StateVector& z) const override;
    bool nonnegative() const override { return true; }

private:
    InnerProduct space_;
};

// psi^t(z) = phi^t(z) + (d0/2)||z||^2 + d0. The prox reduces exactly to the
// base prox at step lambda/(1 + lambda d0) applied to z/(1 + lambda d0).
std::shared_ptr<const Energy> shift_regularize(std::shared_ptr<const Energy> base, double d0);

// Difference-quotient probe of time regularity along the shift map:
//   displacement_ratio = ||Psi(t,s,w) - w|| / (|t-s| (1 + |phi^s(w)|)^{1/2})
//   energy_growth_ratio = max(0, phi^t(Psi) - phi^s(w)) / (|t-s| (1 + |phi^s(w)|)).
// t == s short-circuits to the unchanged state with zero ratios.
struct KenmochiSample {
    StateVector shifted;
    double displacement_ratio = 0.0;
    double energy_growth_ratio = 0.0;
};

KenmochiSample kenmochi_probe(const Energy& phi, double t, double s, const StateVector& w);

}  // namespace fracflow
