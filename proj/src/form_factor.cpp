#include "polarcav/form_factor.hpp"

#include "polarcav/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace polarcav {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double quad_tolerance = 1e-12;

double lorentzian_shape(double omega, double center, double gamma)
{
    const double hw2 = 0.25 * gamma * gamma;
    const double d = omega - center;
    return hw2 / (d * d + hw2);
}

double upper_limit(const FormFactor& ff)
{
    return ff.cutoff() ? *ff.cutoff() : inf;
}

void check_endpoints(double omega0, double hi)
{
    if (omega0 == 0.0 || omega0 == hi)
        throw DivergentShift("principal value has a pole at an integration endpoint");
}

// Integral of f over [a, b] (b may be +inf), split at interior breakpoints.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::vector<double> breaks)
{
    if (!(b > a))
        return 0.0;
    std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
    std::sort(breaks.begin(), breaks.end());
    breaks.insert(breaks.begin(), a);
    breaks.push_back(b);

    boost::math::quadrature::tanh_sinh<double> finite;
    boost::math::quadrature::exp_sinh<double> semi;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = breaks[i];
        const double hi = breaks[i + 1];
        if (std::isinf(hi))
            total += semi.integrate([&](double x) { return f(x); }, lo, hi, quad_tolerance);
        else
            total += finite.integrate([&](double x) { return f(x); }, lo, hi, quad_tolerance);
    }
    return total;
}

std::vector<double> feature_points(const FormFactor& ff)
{
    if (ff.kind() != FormFactorKind::lorentzian)
        return {};
    const double c = ff.omega_ext();
    const double w = ff.gamma_ext();
    return {c - 30.0 * w, c - w, c, c + w, c + 30.0 * w};
}

}  // namespace

FormFactor FormFactor::constant(double omega_ref)
{
    if (!(omega_ref > 0.0))
        throw std::invalid_argument("form factor reference frequency must be positive");
    FormFactor ff;
    ff.kind_ = FormFactorKind::constant;
    ff.omega_ref_ = omega_ref;
    return ff;
}

FormFactor FormFactor::power_law(double exponent, double omega_ref)
{
    FormFactor ff = constant(omega_ref);
    ff.kind_ = FormFactorKind::power_law;
    ff.exponent_ = exponent;
    return ff;
}

FormFactor FormFactor::lorentzian(double omega_ext, double gamma_ext, double omega_ref)
{
    if (!(omega_ext > 0.0) || !(gamma_ext > 0.0))
        throw std::invalid_argument("Lorentzian form factor needs positive centre and width");
    FormFactor ff = constant(omega_ref);
    ff.kind_ = FormFactorKind::lorentzian;
    ff.omega_ext_ = omega_ext;
    ff.gamma_ext_ = gamma_ext;
    ff.scale_ = 1.0 / lorentzian_shape(omega_ref, omega_ext, gamma_ext);
    return ff;
}

FormFactor FormFactor::with_cutoff(double cutoff) const
{
    if (!(cutoff > 0.0))
        throw std::invalid_argument("cutoff must be positive");
    FormFactor ff = *this;
    ff.cutoff_ = cutoff;
    return ff;
}

double FormFactor::shape(double omega) const
{
    if (omega <= 0.0)
        return 0.0;
    if (kind_ == FormFactorKind::lorentzian)
        return lorentzian_shape(omega, omega_ext_, gamma_ext_);
    return (*this)(omega);
}

double FormFactor::operator()(double omega) const
{
    if (omega <= 0.0)
        return 0.0;
    switch (kind_) {
    case FormFactorKind::constant:
        return 1.0;
    case FormFactorKind::power_law:
        return std::pow(omega / omega_ref_, exponent_);
    case FormFactorKind::lorentzian:
        return scale_ * lorentzian_shape(omega, omega_ext_, gamma_ext_);
    }
    return 0.0;
}

bool FormFactor::shift_converges() const
{
    switch (kind_) {
    case FormFactorKind::constant:
        return cutoff_.has_value();
    case FormFactorKind::power_law:
        if (exponent_ <= -1.0)
            return false;
        return exponent_ < 0.0 || cutoff_.has_value();
    case FormFactorKind::lorentzian:
        return true;
    }
    return false;
}

std::string FormFactor::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case FormFactorKind::constant:
        os << "constant";
        break;
    case FormFactorKind::power_law:
        os << "power_law(p=" << exponent_ << ")";
        break;
    case FormFactorKind::lorentzian:
        os << "lorentzian(omega_ext=" << omega_ext_ << ", gamma_ext=" << gamma_ext_ << ")";
        break;
    }
    if (cutoff_)
        os << " cutoff=" << *cutoff_;
    return os.str();
}

double principal_value(const FormFactor& ff, double omega0)
{
    if (!ff.shift_converges())
        throw DivergentShift("principal-value shift diverges for " + ff.describe() +
                             "; supply a finite cutoff");
    const double hi = upper_limit(ff);
    check_endpoints(omega0, hi);

    switch (ff.kind()) {
    case FormFactorKind::constant:
        return std::log(std::abs((hi - omega0) / omega0));
    case FormFactorKind::power_law:
        if (ff.exponent() == 0.0)
            return std::log(std::abs((hi - omega0) / omega0));
        return principal_value_quadrature(ff, omega0);
    case FormFactorKind::lorentzian: {
        // Partial fractions with u = w - w_ext, c = w0 - w_ext, b = gamma/2:
        //   b^2 / ((u^2 + b^2)(u - c)) = b^2/(c^2+b^2) [1/(u-c) - (u + c)/(u^2 + b^2)]
        const double a = ff.omega_ext();
        const double b = 0.5 * ff.gamma_ext();
        const double c = omega0 - a;
        auto log_part = [&](double w) {
            if (std::isinf(w))
                return 0.0;
            const double u = w - a;
            return std::log(std::abs(w - omega0)) - 0.5 * std::log(u * u + b * b);
        };
        auto atan_part = [&](double w) {
            if (std::isinf(w))
                return 0.5 * std::numbers::pi;
            return std::atan((w - a) / b);
        };
        const double bracket =
            log_part(hi) - log_part(0.0) - (c / b) * (atan_part(hi) - atan_part(0.0));
        return ff.scale() * b * b / (c * c + b * b) * bracket;
    }
    }
    return 0.0;
}

double principal_value_quadrature(const FormFactor& ff, double omega0)
{
    if (!ff.shift_converges())
        throw DivergentShift("principal-value shift diverges for " + ff.describe() +
                             "; supply a finite cutoff");
    const double lo = 0.0;
    const double hi = upper_limit(ff);
    check_endpoints(omega0, hi);
    const auto features = feature_points(ff);
    auto integrand = [&](double w) { return ff(w) / (w - omega0); };

    if (omega0 < lo || omega0 > hi)
        return integrate(integrand, lo, hi, features);

    // symmetric exclusion: pair w0 + t with w0 - t on 0 < t < delta
    const double delta = std::min(omega0 - lo, hi - omega0);
    std::vector<double> t_breaks;
    for (double x : features)
        t_breaks.push_back(std::abs(x - omega0));
    const double symmetric = integrate(
        [&](double t) { return (ff(omega0 + t) - ff(omega0 - t)) / t; }, 0.0, delta, t_breaks);

    double rest = 0.0;
    if (omega0 - lo < hi - omega0)
        rest = integrate(integrand, omega0 + delta, hi, features);
    else
        rest = integrate(integrand, lo, omega0 - delta, features);
    return symmetric + rest;
}

}  // namespace polarcav
