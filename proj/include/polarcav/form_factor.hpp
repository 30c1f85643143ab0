// form_factor.hpp: reservoir coupling profile P(omega).
//
// Every variant satisfies P(omega_ref) = 1 and P(omega) = 0 for omega <= 0.

#pragma once

#include <optional>
#include <string>

namespace polarcav {

enum class FormFactorKind { constant, power_law, lorentzian };

class FormFactor {
public:
    static FormFactor constant(double omega_ref = 1.0);
    /// P(omega) = (omega / omega_ref)^exponent
    static FormFactor power_law(double exponent, double omega_ref = 1.0);
    /// Lorentzian of full width gamma_ext centred at omega_ext, rescaled so P(omega_ref) = 1.
    static FormFactor lorentzian(double omega_ext, double gamma_ext, double omega_ref = 1.0);

    /// Upper integration limit for principal-value shifts.
    [[nodiscard]] FormFactor with_cutoff(double cutoff) const;

    [[nodiscard]] double operator()(double omega) const;

    /// Lorentzian only: value of the peak-normalized profile, shape(omega_ext) = 1.
    /// P(omega) = scale() * shape(omega).
    [[nodiscard]] double shape(double omega) const;
    [[nodiscard]] double scale() const { return scale_; }

    [[nodiscard]] FormFactorKind kind() const { return kind_; }
    [[nodiscard]] double exponent() const { return exponent_; }
    [[nodiscard]] double omega_ext() const { return omega_ext_; }
    [[nodiscard]] double gamma_ext() const { return gamma_ext_; }
    [[nodiscard]] double omega_ref() const { return omega_ref_; }
    [[nodiscard]] const std::optional<double>& cutoff() const { return cutoff_; }

    /// True when P int_0^cutoff P(w)/(w - w0) dw is finite for every w0 > 0.
    [[nodiscard]] bool shift_converges() const;

    [[nodiscard]] std::string describe() const;

private:
    FormFactor() = default;

    FormFactorKind kind_{FormFactorKind::constant};
    double exponent_{0.0};
    double omega_ext_{0.0};
    double gamma_ext_{0.0};
    double omega_ref_{1.0};
    double scale_{1.0};
    std::optional<double> cutoff_;
};

/// P int_0^{cutoff} P(w) / (w - omega0) dw, closed form where one exists
/// (constant, Lorentzian), adaptive quadrature otherwise. Throws DivergentShift.
[[nodiscard]] double principal_value(const FormFactor& ff, double omega0);

/// Same integral by adaptive quadrature with symmetric exclusion around the
/// pole, for any variant.
[[nodiscard]] double principal_value_quadrature(const FormFactor& ff, double omega0);

}  // namespace polarcav
