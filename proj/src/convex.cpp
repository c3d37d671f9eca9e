#include "fracflow/convex.hpp"

#include <cmath>
#include <utility>

namespace fracflow {

double moreau_value(const Energy& phi, double t, double lambda, const StateVector& z) {
    auto [w, xi] = phi.prox(t, lambda, z);
    const auto& ip = phi.space();
    const StateVector d = diff(z, w);
    return 0.5 / lambda * ip.dot(d, d) + phi.eval(t, w);
}

double QuadraticEnergy::eval(double /*t*/, const StateVector& w) const {
    return 0.5 * a_ * space_.dot(w, w);
}

ProxResult QuadraticEnergy::prox(double /*t*/, double lambda, const StateVector& z) const {
    require_lambda(lambda);
    if (z.size() != space_.dim) throw std::invalid_argument("QuadraticEnergy: dimension mismatch");
    ProxResult r;
    r.w = scaled(z, 1.0 / (1.0 + lambda * a_));
    r.xi = scaled(r.w, a_);
    return r;
}

double AbsValueEnergy::eval(double /*t*/, const StateVector& w) const {
    if (w.size() != 1) throw std::invalid_argument("AbsValueEnergy: scalar energy");
    return std::abs(w[0]);
}

ProxResult AbsValueEnergy::prox(double /*t*/, double lambda, const StateVector& z) const {
    require_lambda(lambda);
    if (z.size() != 1) throw std::invalid_argument("AbsValueEnergy: scalar energy");
    const double u = z[0];
    double w = 0.0;
    if (u > lambda) w = u - lambda;
    else if (u < -lambda) w = u + lambda;
    return {{w}, {(u - w) / lambda}};
}

double ZeroConstraintEnergy::eval(double /*t*/, const StateVector& w) const {
    for (double v : w)
        if (v != 0.0) return infinity;
    return 0.0;
}

ProxResult ZeroConstraintEnergy::prox(double /*t*/, double lambda, const StateVector& z) const {
    require_lambda(lambda);
    if (z.size() != space_.dim) throw std::invalid_argument("ZeroConstraintEnergy: dimension mismatch");
    ProxResult r;
    r.w.assign(z.size(), 0.0);
    r.xi = scaled(z, 1.0 / lambda);
    return r;
}

namespace {

class ShiftedEnergy final : public Energy {
public:
    ShiftedEnergy(std::shared_ptr<const Energy> base, double d0)
        : base_(std::move(base)), d0_(d0) {}

    const InnerProduct& space() const override { return base_->space(); }

    double eval(double t, const StateVector& w) const override {
        const double v = base_->eval(t, w);
        if (v == infinity) return infinity;
        return v + 0.5 * d0_ * space().dot(w, w) + d0_;
    }

    ProxResult prox(double t, double lambda, const StateVector& z) const override {
        require_lambda(lambda);
        const double shrink = 1.0 + lambda * d0_;
        auto inner = base_->prox(t, lambda / shrink, scaled(z, 1.0 / shrink));
        ProxResult r;
        r.w = std::move(inner.w);
        r.xi = diff(z, r.w);
        for (double& v : r.xi) v /= lambda;
        return r;
    }

    bool autonomous() const override { return base_->autonomous(); }
    bool nonnegative() const override { return base_->nonnegative(); }
    bool has_shift_map() const override { return base_->has_shift_map(); }
    StateVector shift_map(double t, double s, const StateVector& w) const override {
        return base_->shift_map(t, s, w);
    }

private:
    std::shared_ptr<const Energy> base_;
    double d0_;
};

}  // namespace

std::shared_ptr<const Energy> shift_regularize(std::shared_ptr<const Energy> base, double d0) {
    if (!base) throw std::invalid_argument("shift_regularize: null energy");
    if (!(d0 >= 0.0)) throw std::invalid_argument("shift_regularize: offset must be nonnegative");
    return std::make_shared<ShiftedEnergy>(std::move(base), d0);
}

KenmochiSample kenmochi_probe(const Energy& phi, double t, double s, const StateVector& w) {
    KenmochiSample out;
    if (t == s || phi.autonomous()) {
        out.shifted = w;
        return out;
    }
    if (!phi.has_shift_map())
        throw std::logic_error("kenmochi_probe: energy has no shift map");

    const double phis = phi.eval(s, w);
    if (!std::isfinite(phis))
        throw std::invalid_argument("kenmochi_probe: state must have finite energy at s");

    out.shifted = phi.shift_map(t, s, w);
    const double phit = phi.eval(t, out.shifted);
    const double gap = std::abs(t - s);
    const StateVector d = diff(out.shifted, w);
    out.displacement_ratio = phi.space().norm(d) / (gap * std::sqrt(1.0 + std::abs(phis)));
    out.energy_growth_ratio = std::max(0.0, phit - phis) / (gap * (1.0 + std::abs(phis)));
    return out;
}

}  // namespace fracflow
