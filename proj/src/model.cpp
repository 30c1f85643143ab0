#include "polarcav/model.hpp"

#include "polarcav/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace polarcav {

void ModelParams::validate() const
{
    if (!(omega_c > 0.0) || !(omega_a > 0.0))
        throw std::invalid_argument("omega_c and omega_a must be positive");
    if (!(g_R >= 0.0) || !(g_S >= 0.0) || !(g_S_prime >= 0.0))
        throw std::invalid_argument("couplings must be nonnegative");
}

ModelParams with_couplings(ModelParams p, double g_R, double g_S)
{
    p.g_R = g_R;
    p.g_S = g_S;
    return p;
}

std::string to_string(const StateLabel& label)
{
    return std::to_string(label.n) + (label.s == Branch::plus ? ",+" : ",-");
}

StateLabel parse_label(const std::string& text)
{
    std::size_t pos = 0;
    int n = 0;
    try {
        n = std::stoi(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad state label '" + text + "'");
    }
    std::string rest = text.substr(pos);
    if (!rest.empty() && rest.front() == ',')
        rest.erase(0, 1);
    Branch s;
    if (rest == "+" || rest == "1" || rest == "+1")
        s = Branch::plus;
    else if (rest == "-" || rest == "-1")
        s = Branch::minus;
    else
        throw std::invalid_argument("bad state label '" + text + "'");
    if (n < 0)
        throw std::invalid_argument("negative manifold in label '" + text + "'");
    return {n, s};
}

Branch ground_branch(const ModelParams& p)
{
    return p.detuning() > 0.0 ? Branch::plus : Branch::minus;
}

StateLabel canonical(StateLabel label, const ModelParams& p)
{
    if (label.n == 0)
        label.s = ground_branch(p);
    return label;
}

std::vector<StateLabel> manifold_labels(int n, const ModelParams& p)
{
    if (n < 0)
        return {};
    if (n == 0)
        return {{0, ground_branch(p)}};
    return {{n, Branch::plus}, {n, Branch::minus}};
}

double jc_energy(const StateLabel& label, const ModelParams& p)
{
    if (label.n == 0)
        return -0.5 * p.omega_a;
    const double x = 0.5 * p.detuning();
    const double r = std::sqrt(x * x + label.n * p.g_R * p.g_R);
    return p.omega_c * (label.n - 0.5) + sign(label.s) * r;
}

JCEigenpair jc_eigenpair(const StateLabel& label, const ModelParams& p)
{
    JCEigenpair out{label, jc_energy(label, p), 1.0, 0.0};
    if (label.n == 0)
        return out;

    // With x = detuning/2 and r = sqrt(x^2 + n g^2):
    //   A = s sqrt((r + s x) / 2r),  B = sqrt((r - s x) / 2r).
    // The smaller of the two is formed from g sqrt(n) to avoid cancellation.
    const double s = sign(label.s);
    const double x = 0.5 * p.detuning();
    const double gn = p.g_R * std::sqrt(static_cast<double>(label.n));
    const double r = std::hypot(x, gn);
    if (r == 0.0) {
        // resonant and uncoupled: limit g_R -> 0+
        out.A = s / std::sqrt(2.0);
        out.B = 1.0 / std::sqrt(2.0);
        return out;
    }
    if (s * x >= 0.0) {
        const double big = r + s * x;
        out.A = s * std::sqrt(big / (2.0 * r));
        out.B = gn / std::sqrt(2.0 * r * big);
    } else {
        const double big = r - s * x;
        out.B = std::sqrt(big / (2.0 * r));
        out.A = s * gn / std::sqrt(2.0 * r * big);
    }
    return out;
}

namespace {

struct LabelPair {
    StateLabel a;
    StateLabel b;
};

std::vector<StateLabel> window_labels(const ModelParams& p, int n_min, int n_max)
{
    std::vector<StateLabel> labels;
    for (int n = n_min; n <= n_max; ++n)
        for (const auto& l : manifold_labels(n, p))
            labels.push_back(l);
    return labels;
}

double gap(const LabelPair& pair, const ModelParams& p)
{
    return jc_energy(pair.a, p) - jc_energy(pair.b, p);
}

}  // namespace

Crossing jc_crossing_scan(const ModelParams& p_template, double g_lo, double g_hi,
                          const CrossingScanOptions& options)
{
    if (!(g_lo >= 0.0) || !(g_hi > g_lo))
        throw std::invalid_argument("crossing scan needs 0 <= g_lo < g_hi");
    if (options.n_max < 2 || options.n_min < 0 || options.n_min >= options.n_max)
        throw std::invalid_argument("crossing scan needs 0 <= n_min < n_max and n_max >= 2");
    if (options.grid_points < 2)
        throw std::invalid_argument("crossing scan needs at least two grid points");

    ModelParams p = p_template;
    const auto labels = window_labels(p, options.n_min, options.n_max);
    std::vector<LabelPair> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            pairs.push_back({labels[i], labels[j]});

    auto gaps_at = [&](double g) {
        p.g_R = g;
        std::vector<double> out(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k)
            out[k] = gap(pairs[k], p);
        return out;
    };

    const int npts = options.grid_points;
    const double step = (g_hi - g_lo) / (npts - 1);
    auto prev = gaps_at(g_lo);
    for (int i = 1; i < npts; ++i) {
        const double g_left = g_lo + (i - 1) * step;
        const double g_right = (i == npts - 1) ? g_hi : g_lo + i * step;
        auto cur = gaps_at(g_right);

        // Several pairs may flip inside one cell; keep the earliest after refinement.
        bool found = false;
        Crossing best;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (!(prev[k] * cur[k] < 0.0))
                continue;
            double lo = g_left;
            double hi = g_right;
            const double sign_lo = prev[k];
            while (hi - lo > 0.5 * options.tolerance) {
                const double mid = 0.5 * (lo + hi);
                p.g_R = mid;
                if (gap(pairs[k], p) * sign_lo > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double g_cross = 0.5 * (lo + hi);
            if (!found || g_cross < best.g_R) {
                found = true;
                best.g_R = g_cross;
                // gap = E_a - E_b; negative before the crossing means a is below
                best.lower = sign_lo < 0.0 ? pairs[k].a : pairs[k].b;
                best.upper = sign_lo < 0.0 ? pairs[k].b : pairs[k].a;
            }
        }
        if (found)
            return best;
        prev = std::move(cur);
    }
    throw NoCrossingFound("no JC level crossing for g_R in [" + std::to_string(g_lo) + ", " +
                          std::to_string(g_hi) + "]");
}

}  // namespace polarcav
