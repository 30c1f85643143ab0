// perturbation.hpp: second-order Rayleigh-Schroedinger treatment of the
// counter-rotating and diagonal-coupling terms on top of the JC ladder.

#pragma once

#include "polarcav/model.hpp"

#include <array>
#include <map>

namespace polarcav {

struct PerturbationOptions {
    /// Energy denominators below this (units of omega_c) raise NearDegeneracy.
    double degeneracy_tolerance{1e-6};
};

using Amplitudes = std::map<StateLabel, double>;

/// State expanded over zeroth-order JC labels. Support spans manifolds n-4..n+4.
struct PerturbedState {
    StateLabel label;
    /// Components by perturbative order: [0] = {label: 1}, [1] first order, [2] second order.
    std::array<Amplitudes, 3> orders;
    /// Sum of the three orders.
    Amplitudes amplitudes;

    [[nodiscard]] double amplitude(const StateLabel& l) const;
    [[nodiscard]] double norm() const;
};

struct EnergyCorrection {
    StateLabel label;
    double e0{0.0};
    double e2{0.0};

    [[nodiscard]] double total() const { return e0 + e2; }
};

/// <m|V|n> between zeroth-order JC states. Requires g_S_prime == 0.
[[nodiscard]] double v_matrix_element(const StateLabel& m, const StateLabel& n, const ModelParams& p);

[[nodiscard]] EnergyCorrection energy_with_correction(const StateLabel& label, const ModelParams& p,
                                                      const PerturbationOptions& options = {});

[[nodiscard]] PerturbedState perturbed_state(const StateLabel& label, const ModelParams& p,
                                             const PerturbationOptions& options = {});

/// Euclidean norm of the (unrenormalized) second-order state.
[[nodiscard]] double state_norm(const StateLabel& label, const ModelParams& p,
                                const PerturbationOptions& options = {});

/// Non-throwing variant of state_norm for sweeps.
struct NormDiagnostic {
    double norm{1.0};
    bool near_degenerate{false};  ///< norm is +inf
    bool breakdown{false};        ///< near_degenerate or |norm - 1| > threshold
};

[[nodiscard]] NormDiagnostic norm_diagnostic(const StateLabel& label, const ModelParams& p,
                                             double threshold = 1e-2,
                                             const PerturbationOptions& options = {});

}  // namespace polarcav
