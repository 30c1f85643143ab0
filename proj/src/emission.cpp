#include "polarcav/emission.hpp"

#include "polarcav/errors.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace polarcav {

namespace {

class EigenpairCache {
public:
    explicit EigenpairCache(const ModelParams& p) : p_(p) {}

    const JCEigenpair& operator()(const StateLabel& l)
    {
        auto it = cache_.find(l);
        if (it == cache_.end())
            it = cache_.emplace(l, jc_eigenpair(l, p_)).first;
        return it->second;
    }

private:
    const ModelParams& p_;
    std::map<StateLabel, JCEigenpair> cache_;
};

// <lower|a|upper> between zeroth-order states of adjacent manifolds.
double jc_lowering(const StateLabel& lower, const StateLabel& upper, EigenpairCache& pairs)
{
    if (lower.n != upper.n - 1)
        return 0.0;
    const auto& u = pairs(upper);
    const auto& d = pairs(lower);
    const double n = upper.n;
    return std::sqrt(n) * u.A * d.A + std::sqrt(n - 1.0) * u.B * d.B;
}

double a_sq_from_states(const PerturbedState& final, const PerturbedState& initial, const ModelParams& p)
{
    EigenpairCache pairs(p);
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (int fo = 0; fo < 3; ++fo) {
        for (int io = 0; io + fo < 3; ++io) {
            double sum = 0.0;
            for (const auto& [kf, cf] : final.orders[fo])
                for (const auto& [ki, ci] : initial.orders[io])
                    if (kf.n == ki.n - 1)
                        sum += cf * ci * jc_lowering(kf, ki, pairs);
            m[fo + io] += sum;
        }
    }
    return m[0] * m[0] + 2.0 * m[0] * m[1] + m[1] * m[1] + 2.0 * m[0] * m[2];
}

void check_rate(double base_rate)
{
    if (!(base_rate > 0.0))
        throw std::invalid_argument("base rate Gamma must be positive");
}

}  // namespace

std::string to_string(ChannelGroup g)
{
    switch (g) {
    case ChannelGroup::JC:
        return "JC";
    case ChannelGroup::AS:
        return "AS";
    case ChannelGroup::CR:
        return "CR";
    }
    return "?";
}

ChannelGroup group_of(int n_initial, int n_final)
{
    switch (n_initial - n_final) {
    case 1:
        return ChannelGroup::JC;
    case 0:
    case 2:
        return ChannelGroup::AS;
    case 3:
        return ChannelGroup::CR;
    default:
        throw std::invalid_argument("no emission channel between manifolds " + std::to_string(n_initial) +
                                    " and " + std::to_string(n_final));
    }
}

double a_matrix_element_sq(const StateLabel& final, const StateLabel& initial, const ModelParams& p,
                           const PerturbationOptions& options)
{
    return a_sq_from_states(perturbed_state(final, p, options), perturbed_state(initial, p, options), p);
}

std::vector<StateLabel> candidate_finals(const StateLabel& initial_in, const ModelParams& p)
{
    const StateLabel initial = canonical(initial_in, p);
    std::vector<StateLabel> out;
    for (int k = initial.n; k >= initial.n - 3; --k)
        for (const auto& l : manifold_labels(k, p))
            if (l != initial)
                out.push_back(l);
    return out;
}

std::vector<TransitionChannel> enumerate_channels(const StateLabel& initial_in, const ModelParams& p,
                                                  const FormFactor& ff, double base_rate,
                                                  const PerturbationOptions& options)
{
    check_rate(base_rate);
    const StateLabel initial = canonical(initial_in, p);
    const auto initial_state = perturbed_state(initial, p, options);
    const double e_initial = energy_with_correction(initial, p, options).total();

    std::vector<TransitionChannel> out;
    for (const auto& final : candidate_finals(initial, p)) {
        TransitionChannel ch;
        ch.initial = initial;
        ch.final = final;
        ch.group = group_of(initial.n, final.n);
        ch.frequency = e_initial - energy_with_correction(final, p, options).total();
        if (!(ch.frequency > 0.0))
            continue;
        ch.a_sq = a_sq_from_states(perturbed_state(final, p, options), initial_state, p);
        if (ch.a_sq == 0.0)
            continue;
        ch.form_factor = ff(ch.frequency);
        ch.rate = base_rate * ch.a_sq * ch.form_factor;
        out.push_back(ch);
    }
    return out;
}

double total_rate(std::span<const TransitionChannel> channels)
{
    double sum = 0.0;
    for (const auto& ch : channels)
        sum += ch.rate;
    return sum;
}

GroupRates group_rates(std::span<const TransitionChannel> channels)
{
    GroupRates out;
    for (const auto& ch : channels) {
        switch (ch.group) {
        case ChannelGroup::JC:
            out.jc += ch.rate;
            break;
        case ChannelGroup::AS:
            out.as += ch.rate;
            break;
        case ChannelGroup::CR:
            out.cr += ch.rate;
            break;
        }
    }
    return out;
}

std::vector<std::string> degenerate_channel_warnings(std::span<const TransitionChannel> channels,
                                                     double linewidth)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        for (std::size_t j = i + 1; j < channels.size(); ++j) {
            const double d = std::abs(channels[i].frequency - channels[j].frequency);
            if (d < linewidth) {
                std::ostringstream os;
                os.precision(6);
                os << "DegenerateChannels: " << to_string(channels[i].initial) << "->"
                   << to_string(channels[i].final) << " and " << to_string(channels[j].initial) << "->"
                   << to_string(channels[j].final) << " differ by " << d << " < linewidth " << linewidth;
                out.push_back(os.str());
            }
        }
    }
    return out;
}

double lamb_shift(std::span<const TransitionChannel> channels, const FormFactor& ff, double base_rate)
{
    check_rate(base_rate);
    double sum = 0.0;
    for (const auto& ch : channels)
        sum += ch.a_sq * principal_value(ff, ch.frequency);
    return base_rate / (2.0 * std::numbers::pi) * sum;
}

double weight_ratio(const TransitionChannel& c1, const TransitionChannel& c2)
{
    if (c2.rate == 0.0)
        throw DivisionByZeroChannel("reference channel " + to_string(c2.initial) + "->" + to_string(c2.final) +
                                    " has zero rate");
    return c1.rate / c2.rate;
}

std::vector<double> linear_grid(double lo, double hi, int points)
{
    if (points < 2 || !(hi > lo))
        throw std::invalid_argument("grid needs at least two points and max > min");
    std::vector<double> out(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i)
        out[static_cast<std::size_t>(i)] = lo + i * step;
    out.back() = hi;
    return out;
}

EmissionSpectrum spectrum(const StateLabel& initial, const ModelParams& p, const FormFactor& ff,
                          double base_rate, std::span<const double> grid, ShiftMode shift_mode,
                          const PerturbationOptions& options)
{
    check_rate(base_rate);
    if (grid.empty())
        throw std::invalid_argument("spectrum grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("spectrum grid must be strictly increasing");

    EmissionSpectrum out;
    out.initial = canonical(initial, p);
    out.grid.assign(grid.begin(), grid.end());
    out.channels = enumerate_channels(initial, p, ff, base_rate, options);
    out.total_rate = total_rate(out.channels);
    out.warnings = degenerate_channel_warnings(out.channels, out.total_rate);

    if (shift_mode == ShiftMode::automatic) {
        if (ff.shift_converges())
            out.shift = lamb_shift(out.channels, ff, base_rate);
        else
            out.warnings.push_back("Lamb shift set to 0: principal value diverges for " + ff.describe());
    }

    const double hw2 = 0.25 * out.total_rate * out.total_rate;
    out.values.assign(grid.size(), 0.0);
    out.per_channel.assign(out.channels.size(), std::vector<double>(grid.size(), 0.0));
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        const auto& ch = out.channels[c];
        if (ch.rate == 0.0)
            continue;
        const double weight = ch.rate / (2.0 * std::numbers::pi);
        const double center = ch.frequency + out.shift;
        auto& column = out.per_channel[c];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = grid[i] - center;
            column[i] = weight / (d * d + hw2);
            out.values[i] += column[i];
        }
    }
    return out;
}

}  // namespace polarcav
