#include "polarcav/perturbation.hpp"

#include "polarcav/errors.hpp"

#include <cmath>
#include <limits>

namespace polarcav {

namespace {

void require_supported(const ModelParams& p)
{
    if (p.g_S_prime != 0.0)
        throw UnsupportedParameter("perturbative expressions assume g_S_prime = 0");
}

// Labels of manifolds [n - reach, n + reach], excluding manifold n itself when
// skip_own is set.
std::vector<StateLabel> neighbourhood(int n, int reach, const ModelParams& p, bool skip_own)
{
    std::vector<StateLabel> out;
    for (int k = n - reach; k <= n + reach; ++k) {
        if (skip_own && k == n)
            continue;
        for (const auto& l : manifold_labels(k, p))
            out.push_back(l);
    }
    return out;
}

double checked_inverse_gap(double e_from, double e_to, const StateLabel& from, const StateLabel& to,
                           const ModelParams& p, const PerturbationOptions& options)
{
    const double gap = e_from - e_to;
    if (std::abs(gap) < options.degeneracy_tolerance * p.omega_c)
        throw NearDegeneracy("levels " + to_string(from) + " and " + to_string(to) +
                             " are degenerate within tolerance (gap " + std::to_string(gap) + ")");
    return 1.0 / gap;
}

Amplitudes first_order(const StateLabel& label, double e0, const ModelParams& p,
                       const PerturbationOptions& options)
{
    Amplitudes out;
    for (const auto& k : neighbourhood(label.n, 2, p, true)) {
        const double v = v_matrix_element(k, label, p);
        if (v == 0.0)
            continue;
        out[k] = v * checked_inverse_gap(e0, jc_energy(k, p), label, k, p, options);
    }
    return out;
}

}  // namespace

double PerturbedState::amplitude(const StateLabel& l) const
{
    auto it = amplitudes.find(l);
    return it == amplitudes.end() ? 0.0 : it->second;
}

double PerturbedState::norm() const
{
    double sum = 0.0;
    for (const auto& [l, c] : amplitudes)
        sum += c * c;
    return std::sqrt(sum);
}

double v_matrix_element(const StateLabel& m_label, const StateLabel& n_label, const ModelParams& p)
{
    require_supported(p);
    const StateLabel m = canonical(m_label, p);
    const StateLabel n = canonical(n_label, p);
    const int dn = m.n - n.n;
    if (dn == 0 || std::abs(dn) > 2 || m.n < 0 || n.n < 0)
        return 0.0;

    const auto em = jc_eigenpair(m, p);
    const auto en = jc_eigenpair(n, p);
    switch (dn) {
    case -2:
        return p.g_R * std::sqrt(n.n - 1.0) * en.B * em.A;
    case 2:
        return p.g_R * std::sqrt(n.n + 1.0) * en.A * em.B;
    case -1:
        return 2.0 * p.g_S * em.B * en.B * std::sqrt(n.n - 1.0);
    case 1:
        return 2.0 * p.g_S * em.B * en.B * std::sqrt(static_cast<double>(n.n));
    default:
        return 0.0;
    }
}

EnergyCorrection energy_with_correction(const StateLabel& label_in, const ModelParams& p,
                                        const PerturbationOptions& options)
{
    require_supported(p);
    const StateLabel label = canonical(label_in, p);
    EnergyCorrection out{label, jc_energy(label, p), 0.0};
    for (const auto& k : neighbourhood(label.n, 2, p, true)) {
        const double v = v_matrix_element(k, label, p);
        if (v == 0.0)
            continue;
        out.e2 += v * v * checked_inverse_gap(out.e0, jc_energy(k, p), label, k, p, options);
    }
    return out;
}

PerturbedState perturbed_state(const StateLabel& label_in, const ModelParams& p,
                               const PerturbationOptions& options)
{
    require_supported(p);
    const StateLabel label = canonical(label_in, p);
    const double e0 = jc_energy(label, p);

    PerturbedState out;
    out.label = label;
    out.orders[0][label] = 1.0;
    out.orders[1] = first_order(label, e0, p, options);

    double sq = 0.0;
    for (const auto& [k, c] : out.orders[1])
        sq += c * c;
    out.orders[2][label] = -0.5 * sq;

    // sum_l V_kl c1_l / E_nk for every k != label, the intramanifold partner included
    for (const auto& k : neighbourhood(label.n, 4, p, false)) {
        if (k == label)
            continue;
        double numerator = 0.0;
        for (const auto& [l, c1] : out.orders[1])
            numerator += v_matrix_element(k, l, p) * c1;
        if (numerator == 0.0)
            continue;
        out.orders[2][k] = numerator * checked_inverse_gap(e0, jc_energy(k, p), label, k, p, options);
    }

    for (const auto& order : out.orders)
        for (const auto& [k, c] : order)
            out.amplitudes[k] += c;
    return out;
}

double state_norm(const StateLabel& label, const ModelParams& p, const PerturbationOptions& options)
{
    return perturbed_state(label, p, options).norm();
}

NormDiagnostic norm_diagnostic(const StateLabel& label, const ModelParams& p, double threshold,
                               const PerturbationOptions& options)
{
    NormDiagnostic out;
    try {
        out.norm = state_norm(label, p, options);
    } catch (const NearDegeneracy&) {
        out.norm = std::numeric_limits<double>::infinity();
        out.near_degenerate = true;
    }
    out.breakdown = out.near_degenerate || std::abs(out.norm - 1.0) > threshold;
    return out;
}

}  // namespace polarcav
