// emission.hpp: golden-rule decay of a dressed state into the cavity
// reservoir: channel rates, Lamb shift and the Lorentzian-sum spectrum.

#pragma once

#include "polarcav/form_factor.hpp"
#include "polarcav/model.hpp"
#include "polarcav/perturbation.hpp"

#include <span>
#include <string>
#include <vector>

namespace polarcav {

/// Hamiltonian term responsible for a channel: n' = n-1 JC, n' in {n, n-2} AS, n' = n-3 CR.
enum class ChannelGroup { JC, AS, CR };

[[nodiscard]] std::string to_string(ChannelGroup g);
[[nodiscard]] ChannelGroup group_of(int n_initial, int n_final);

struct TransitionChannel {
    StateLabel initial;
    StateLabel final;
    double frequency{0.0};    ///< (E_n^s - E_n'^s') with second-order energies
    double a_sq{0.0};         ///< |<final|a|initial>|^2
    double form_factor{0.0};  ///< P(frequency)
    double rate{0.0};         ///< Gamma * a_sq * P(frequency)
    ChannelGroup group{ChannelGroup::JC};
};

/// |<final|a|initial>|^2 between second-order states, truncated at second
/// order in the couplings. Propagates NearDegeneracy.
[[nodiscard]] double a_matrix_element_sq(const StateLabel& final, const StateLabel& initial,
                                         const ModelParams& p, const PerturbationOptions& options = {});

/// Labels reachable by one emission step from `initial`: manifolds n..n-3, initial excluded.
[[nodiscard]] std::vector<StateLabel> candidate_finals(const StateLabel& initial, const ModelParams& p);

/// Every channel with positive frequency and nonzero squared matrix element.
[[nodiscard]] std::vector<TransitionChannel> enumerate_channels(const StateLabel& initial,
                                                                const ModelParams& p,
                                                                const FormFactor& ff, double base_rate,
                                                                const PerturbationOptions& options = {});

[[nodiscard]] double total_rate(std::span<const TransitionChannel> channels);

struct GroupRates {
    double jc{0.0};
    double as{0.0};
    double cr{0.0};

    [[nodiscard]] double total() const { return jc + as + cr; }
};

[[nodiscard]] GroupRates group_rates(std::span<const TransitionChannel> channels);

/// Pairs of channels whose frequencies differ by less than `linewidth`;
/// the incoherent Lorentzian sum is unreliable for them.
[[nodiscard]] std::vector<std::string> degenerate_channel_warnings(std::span<const TransitionChannel> channels,
                                                                   double linewidth);

/// Delta = Gamma/2pi * sum a_sq * P int P(w)/(w - w_channel) dw. Throws DivergentShift.
[[nodiscard]] double lamb_shift(std::span<const TransitionChannel> channels, const FormFactor& ff,
                                double base_rate);

/// c1.rate / c2.rate. Throws DivisionByZeroChannel when c2.rate == 0.
[[nodiscard]] double weight_ratio(const TransitionChannel& c1, const TransitionChannel& c2);

enum class ShiftMode {
    none,  ///< Delta = 0
    automatic  ///< computed when the form factor admits it, otherwise 0 with a warning
};

struct EmissionSpectrum {
    StateLabel initial;
    std::vector<double> grid;
    std::vector<double> values;                   ///< S(omega)
    std::vector<std::vector<double>> per_channel;  ///< S_channel(omega), same order as `channels`
    double shift{0.0};
    double total_rate{0.0};
    std::vector<TransitionChannel> channels;
    std::vector<std::string> warnings;
};

/// Uniformly spaced grid including both endpoints.
[[nodiscard]] std::vector<double> linear_grid(double lo, double hi, int points);

[[nodiscard]] EmissionSpectrum spectrum(const StateLabel& initial, const ModelParams& p,
                                        const FormFactor& ff, double base_rate,
                                        std::span<const double> grid,
                                        ShiftMode shift_mode = ShiftMode::none,
                                        const PerturbationOptions& options = {});

}  // namespace polarcav
