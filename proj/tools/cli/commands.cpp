#include "cli/commands.hpp"

#include "polarcav/emission.hpp"
#include "polarcav/errors.hpp"
#include "polarcav/oracle.hpp"
#include "polarcav/perturbation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace polarcav::cli {

namespace {

using nlohmann::json;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string channel_id(const StateLabel& l)
{
    return fmt::format("{}_{}", l.n, l.s == Branch::plus ? '+' : '-');
}

std::string channel_name(const StateLabel& i, const StateLabel& f)
{
    return to_string(i) + "->" + to_string(f);
}

Report new_report(Command c, const RunConfig& cfg)
{
    Report r;
    r.command = c;
    r.config = cfg;
    return r;
}

// Physics input checks mirror the ones in the library but should come out as
// config errors, not numerical failures.
void check_config(const RunConfig& cfg)
{
    cfg.check();
    for (const auto& l : cfg.initial)
        if (l.n < 0)
            throw ConfigError("initial label " + to_string(l) + " has negative n");
}

PerturbationOptions default_options()
{
    return {};
}

int worker_count(const RunConfig& cfg, std::size_t jobs)
{
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(1, n);
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, count) on a small pool; results are written by
// index so the output order never depends on scheduling.
template <typename Job>
void parallel_for(std::size_t count, int workers, Job job)
{
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load())
                    return;
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    failed = true;
                    return;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

void add_norm_metadata(Table& t, const StateLabel& initial, const ModelParams& p, const RunConfig& cfg,
                       Report& report)
{
    const auto diag = norm_diagnostic(initial, p, cfg.breakdown_threshold);
    t.metadata.emplace_back("state_norm", diag.norm);
    t.metadata.emplace_back("breakdown", diag.breakdown);
    if (diag.breakdown) {
        report.validity_breach = true;
        report.warnings.push_back(fmt::format("state {} norm {} deviates from 1 by more than {}",
                                              to_string(initial), format_number(diag.norm),
                                              format_number(cfg.breakdown_threshold)));
    }
}

// the Lorentzian centre can follow the coupling, so describe the spec itself
std::string describe(const FormFactorSpec& spec)
{
    switch (spec.kind) {
    case FormFactorKind::constant:
        return "constant";
    case FormFactorKind::power_law:
        return fmt::format("power_law(p={})", spec.exponent);
    case FormFactorKind::lorentzian:
        return fmt::format("lorentzian(omega_ext={}, gamma_ext={} {})",
                           spec.omega_ext ? fmt::format("{}", *spec.omega_ext) : "auto", spec.gamma_ext,
                           spec.gamma_reference == FormFactorSpec::WidthReference::omega_c ? "omega_c" : "omega_ext");
    }
    return "?";
}

std::string shift_choice(const RunConfig& cfg)
{
    return cfg.lamb_shift ? "automatic (principal value; 0 where it diverges)" : "none (Delta = 0)";
}

}  // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.12e}", v);
}

Report run_spectrum(const RunConfig& cfg)
{
    check_config(cfg);
    Report report = new_report(Command::spectrum, cfg);
    const auto& p = cfg.params;
    const double u = cfg.unit_scale;
    const auto grid = linear_grid(cfg.grid.min, cfg.grid.max, cfg.grid.points);
    report.metadata.emplace_back("lamb_shift", shift_choice(cfg));
    report.metadata.emplace_back("normalization", "S_norm = S_total / max(S_total) per table");

    for (const auto& initial : cfg.initial) {
        const FormFactor ff = cfg.form_factor.resolve(p, initial);
        const auto s = spectrum(initial, p, ff, cfg.base_rate, grid,
                                cfg.lamb_shift ? ShiftMode::automatic : ShiftMode::none, default_options());
        Table t;
        t.name = "spectrum " + to_string(s.initial);
        t.metadata.emplace_back("initial", to_string(s.initial));
        t.metadata.emplace_back("form_factor", ff.describe());
        t.metadata.emplace_back("total_rate", s.total_rate * u);
        t.metadata.emplace_back("shift", s.shift * u);
        t.metadata.emplace_back("channels", static_cast<int>(s.channels.size()));
        add_norm_metadata(t, s.initial, p, cfg, report);
        for (const auto& w : s.warnings)
            report.warnings.push_back(to_string(s.initial) + ": " + w);

        t.columns = {"omega", "S_total", "S_norm"};
        for (const auto& ch : s.channels)
            t.columns.push_back("S_" + channel_id(ch.final));
        const double peak = s.values.empty() ? 0.0 : *std::max_element(s.values.begin(), s.values.end());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::vector<json> row{grid[i] * u, s.values[i] / u, peak > 0.0 ? s.values[i] / peak : 0.0};
            for (const auto& column : s.per_channel)
                row.emplace_back(column[i] / u);
            t.rows.push_back(std::move(row));
        }
        report.tables.push_back(std::move(t));
    }
    return report;
}

Report run_rates(const RunConfig& cfg)
{
    check_config(cfg);
    Report report = new_report(Command::rates, cfg);
    const auto& p = cfg.params;
    const double u = cfg.unit_scale;
    report.metadata.emplace_back("lamb_shift", shift_choice(cfg));

    for (const auto& initial_in : cfg.initial) {
        const StateLabel initial = canonical(initial_in, p);
        const FormFactor ff = cfg.form_factor.resolve(p, initial);
        const auto channels = enumerate_channels(initial, p, ff, cfg.base_rate, default_options());
        const double total = total_rate(channels);
        const auto groups = group_rates(channels);

        Table t;
        t.name = "rates " + to_string(initial);
        t.metadata.emplace_back("initial", to_string(initial));
        t.metadata.emplace_back("form_factor", ff.describe());
        t.metadata.emplace_back("energy", energy_with_correction(initial, p).total() * u);
        t.metadata.emplace_back("total_rate", total * u);
        t.metadata.emplace_back("G_JC", groups.jc * u);
        t.metadata.emplace_back("G_AS", groups.as * u);
        t.metadata.emplace_back("G_CR", groups.cr * u);
        if (cfg.lamb_shift) {
            double shift = 0.0;
            if (ff.shift_converges())
                shift = lamb_shift(channels, ff, cfg.base_rate);
            else
                report.warnings.push_back("Lamb shift set to 0: principal value diverges for " + ff.describe());
            t.metadata.emplace_back("shift", shift * u);
        }
        add_norm_metadata(t, initial, p, cfg, report);
        for (const auto& w : degenerate_channel_warnings(channels, total))
            report.warnings.push_back(to_string(initial) + ": " + w);

        t.columns = {"channel", "group", "final_n", "final_s", "frequency", "a_sq", "form_factor", "rate",
                     "branching"};
        for (const auto& ch : channels)
            t.rows.push_back({channel_name(ch.initial, ch.final), to_string(ch.group), ch.final.n,
                              sign(ch.final.s), ch.frequency * u, ch.a_sq, ch.form_factor, ch.rate * u,
                              total > 0.0 ? ch.rate / total : nan});
        report.tables.push_back(std::move(t));
    }
    return report;
}

Report run_sweep(const RunConfig& cfg)
{
    check_config(cfg);
    Report report = new_report(Command::sweep, cfg);
    const double u = cfg.unit_scale;
    const auto couplings = cfg.sweep.couplings();
    if (couplings.back() > 0.1 * cfg.params.omega_c)
        report.warnings.push_back(fmt::format("sweep reaches g_R = {} > 0.1 omega_c; second-order results are "
                                              "outside their validity range there, see state_norm",
                                              format_number(couplings.back())));

    struct Row {
        double g_R{0.0};
        double g_S{0.0};
        std::vector<double> rates;
        GroupRates groups;
        double total{0.0};
        NormDiagnostic norm;
        std::string note;
    };

    for (const auto& initial_in : cfg.initial) {
        const StateLabel initial = canonical(initial_in, cfg.params);
        const auto finals = candidate_finals(initial, cfg.params);
        for (double ratio : cfg.sweep.ratios) {
            std::vector<Row> rows(couplings.size());
            parallel_for(couplings.size(), worker_count(cfg, couplings.size()), [&](std::size_t i) {
                Row& row = rows[i];
                row.g_R = couplings[i];
                row.g_S = ratio * couplings[i];
                const ModelParams p = with_couplings(cfg.params, row.g_R, row.g_S);
                row.rates.assign(finals.size(), 0.0);
                row.norm = norm_diagnostic(initial, p, cfg.breakdown_threshold);
                try {
                    const FormFactor ff = cfg.form_factor.resolve(p, initial);
                    const auto channels = enumerate_channels(initial, p, ff, cfg.base_rate, default_options());
                    for (const auto& ch : channels) {
                        const auto it = std::find(finals.begin(), finals.end(), ch.final);
                        row.rates[static_cast<std::size_t>(it - finals.begin())] = ch.rate;
                    }
                    row.groups = group_rates(channels);
                    row.total = total_rate(channels);
                } catch (const NearDegeneracy& e) {
                    std::fill(row.rates.begin(), row.rates.end(), nan);
                    row.groups = {nan, nan, nan};
                    row.total = nan;
                    row.norm.breakdown = true;
                    row.note = e.what();
                }
            });

            Table t;
            t.name = fmt::format("sweep {} g_S/g_R={}", to_string(initial), ratio);
            t.metadata.emplace_back("initial", to_string(initial));
            t.metadata.emplace_back("ratio", ratio);
            t.metadata.emplace_back("form_factor", describe(cfg.form_factor));
            t.columns = {"g_R", "g_S"};
            for (const auto& f : finals)
                t.columns.push_back("G_" + channel_id(f));
            for (const char* c : {"G_JC", "G_AS", "G_CR", "total", "state_norm", "breakdown_flag"})
                t.columns.emplace_back(c);
            int breakdowns = 0;
            for (const auto& row : rows) {
                std::vector<json> cells{row.g_R * u, row.g_S * u};
                for (double r : row.rates)
                    cells.emplace_back(r * u);
                cells.emplace_back(row.groups.jc * u);
                cells.emplace_back(row.groups.as * u);
                cells.emplace_back(row.groups.cr * u);
                cells.emplace_back(row.total * u);
                cells.emplace_back(row.norm.norm);
                cells.emplace_back(row.norm.breakdown ? 1 : 0);
                t.rows.push_back(std::move(cells));
                if (row.norm.breakdown)
                    ++breakdowns;
                if (!row.note.empty())
                    report.warnings.push_back(fmt::format("g_R = {}: {}", format_number(row.g_R), row.note));
            }
            t.metadata.emplace_back("breakdown_rows", breakdowns);
            if (breakdowns > 0)
                report.validity_breach = true;
            report.tables.push_back(std::move(t));
        }
    }
    return report;
}

Report run_crossings(const RunConfig& cfg)
{
    check_config(cfg);
    Report report = new_report(Command::crossings, cfg);
    const auto& c = cfg.crossings;
    const double u = cfg.unit_scale;

    std::vector<StateLabel> labels;
    for (int n = c.n_min; n <= c.n_max; ++n)
        for (const auto& l : manifold_labels(n, cfg.params))
            labels.push_back(l);

    Table t;
    t.name = "jc energies";
    t.columns = {"g_R"};
    for (const auto& l : labels)
        t.columns.push_back("E_" + channel_id(l));
    const auto gs = linear_grid(c.g_min, c.g_max, c.table_points);
    for (double g : gs) {
        const ModelParams p = with_couplings(cfg.params, g, cfg.params.g_S);
        std::vector<json> row{g * u};
        for (const auto& l : labels)
            row.emplace_back(jc_energy(l, p) * u);
        t.rows.push_back(std::move(row));
    }

    CrossingScanOptions opts;
    opts.n_min = c.n_min;
    opts.n_max = c.n_max;
    opts.grid_points = c.grid_points;
    try {
        const auto x = jc_crossing_scan(cfg.params, c.g_min, c.g_max, opts);
        report.metadata.emplace_back("first_crossing_g_R", x.g_R * u);
        report.metadata.emplace_back("first_crossing_lower", to_string(x.lower));
        report.metadata.emplace_back("first_crossing_upper", to_string(x.upper));
    } catch (const NoCrossingFound& e) {
        report.metadata.emplace_back("first_crossing_g_R", "none");
        report.warnings.push_back(e.what());
    }
    report.tables.push_back(std::move(t));
    return report;
}

Report run_validate(const RunConfig& cfg)
{
    check_config(cfg);
    Report report = new_report(Command::validate, cfg);
    const auto& v = cfg.validate;
    const StateLabel initial = canonical(cfg.initial.front(), cfg.params);

    Table norms;
    norms.name = "norm " + to_string(initial);
    norms.columns = {"g_R", "g_S", "state_norm", "deviation", "breakdown_flag"};
    double first_breakdown = nan;
    for (double g : linear_grid(v.g_min, v.g_max, v.points)) {
        const ModelParams p = with_couplings(cfg.params, g, v.ratio * g);
        const auto d = norm_diagnostic(initial, p, cfg.breakdown_threshold);
        norms.rows.push_back({g, v.ratio * g, d.norm, std::abs(d.norm - 1.0), d.breakdown ? 1 : 0});
        if (d.breakdown && std::isnan(first_breakdown))
            first_breakdown = g;
    }
    norms.metadata.emplace_back("first_breakdown_g_R", first_breakdown);
    if (!std::isnan(first_breakdown))
        report.validity_breach = true;
    report.tables.push_back(std::move(norms));

    Table energies;
    energies.name = "oracle energies";
    energies.columns = {"g_R", "g_S", "label", "exact", "perturbative", "difference", "relative", "match_overlap",
                        "overlap_deficit"};
    Table elements;
    elements.name = "oracle matrix elements";
    elements.columns = {"g_R", "g_S", "channel", "exact_a_sq", "perturbative_a_sq", "relative_difference"};

    std::vector<double> fit_g, fit_residual;
    double worst_shift = 0.0;
    bool converged = true;
    for (double g : v.oracle_couplings) {
        const ModelParams p = with_couplings(cfg.params, g, v.ratio * g);
        // no comparison until the cutoff has plateaued
        try {
            const double shift = oracle::cutoff_doubling_shift(p, {initial}, v.fock_cutoff);
            worst_shift = std::max(worst_shift, shift);
            if (!(shift <= v.convergence_tolerance)) {
                converged = false;
                report.warnings.push_back(fmt::format("g_R = {}: exact energies move by {} when the Fock cutoff "
                                                      "doubles; comparison withheld",
                                                      format_number(g), format_number(shift)));
                continue;
            }
        } catch (const AmbiguousMatch& e) {
            report.warnings.push_back(fmt::format("g_R = {}: {}", format_number(g), e.what()));
            continue;
        }
        std::vector<std::pair<StateLabel, StateLabel>> transitions;
        std::vector<StateLabel> labels{initial};
        for (const auto& f : candidate_finals(initial, p)) {
            transitions.emplace_back(initial, f);
            labels.push_back(f);
        }
        const auto eigs = oracle::exact_eigensystem(oracle::build_hamiltonian(p, v.fock_cutoff, initial.n));
        oracle::ComparisonReport cmp;
        try {
            cmp = oracle::match_and_compare(eigs, p, labels, transitions);
        } catch (const AmbiguousMatch& e) {
            report.warnings.push_back(fmt::format("g_R = {}: {}", format_number(g), e.what()));
            continue;
        }
        for (const auto& s : cmp.states) {
            const double rel = s.exact_energy != 0.0 ? std::abs(s.energy_difference / s.exact_energy)
                                                     : std::abs(s.energy_difference);
            energies.rows.push_back({g, v.ratio * g, to_string(s.label), s.exact_energy, s.perturbative_energy,
                                     s.energy_difference, rel, s.match_overlap, s.overlap_deficit});
            if (s.label == initial && g > 0.0) {
                fit_g.push_back(g);
                fit_residual.push_back(std::abs(s.energy_difference));
            }
        }
        for (const auto& tr : cmp.transitions)
            elements.rows.push_back({g, v.ratio * g, channel_name(tr.initial, tr.final), tr.exact_a_sq,
                                     tr.perturbative_a_sq, tr.relative_difference()});
    }
    const double slope = fit_g.size() >= 2 ? loglog_slope(fit_g, fit_residual) : nan;
    report.metadata.emplace_back("energy_error_exponent", slope);
    report.metadata.emplace_back("energy_error_exponent_expected", 4.0);

    report.metadata.emplace_back("cutoff_doubling_shift", worst_shift);
    report.metadata.emplace_back("oracle_converged", converged ? 1 : 0);
    report.tables.push_back(std::move(energies));
    report.tables.push_back(std::move(elements));
    return report;
}

Report run(Command command, const RunConfig& cfg)
{
    switch (command) {
    case Command::spectrum:
        return run_spectrum(cfg);
    case Command::rates:
        return run_rates(cfg);
    case Command::sweep:
        return run_sweep(cfg);
    case Command::crossings:
        return run_crossings(cfg);
    case Command::validate:
        return run_validate(cfg);
    }
    throw ConfigError("unknown command");
}

namespace {

std::string cell_text(const json& c)
{
    if (c.is_number_float())
        return format_number(c.get<double>());
    if (c.is_string())
        return c.get<std::string>();
    if (c.is_boolean())
        return c.get<bool>() ? "1" : "0";
    return c.dump();
}

json cell_json(const json& c)
{
    if (c.is_number_float() && !std::isfinite(c.get<double>()))
        return nullptr;
    return c;
}

json pairs_json(const std::vector<std::pair<std::string, json>>& pairs)
{
    json out = json::object();
    for (const auto& [k, val] : pairs)
        out[k] = cell_json(val);
    return out;
}

}  // namespace

void write_table(std::ostream& out, const Report& report)
{
    out << "# command = " << to_string(report.command) << '\n';
    out << "# config = " << to_json(report.config).dump() << '\n';
    for (const auto& [k, val] : report.metadata)
        out << "# " << k << " = " << cell_text(val) << '\n';
    for (const auto& w : report.warnings)
        out << "# warning = " << w << '\n';
    out << "# validity_breach = " << (report.validity_breach ? 1 : 0) << '\n';
    for (const auto& t : report.tables) {
        out << "#\n# table = " << t.name << '\n';
        for (const auto& [k, val] : t.metadata)
            out << "# " << k << " = " << cell_text(val) << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out << (i ? "\t" : "") << t.columns[i];
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "\t" : "") << cell_text(row[i]);
            out << '\n';
        }
    }
}

json metadata_json(const Report& report)
{
    json j;
    j["command"] = to_string(report.command);
    j["config"] = to_json(report.config);
    j["metadata"] = pairs_json(report.metadata);
    j["warnings"] = report.warnings;
    j["validity_breach"] = report.validity_breach;
    j["tables"] = json::array();
    for (const auto& t : report.tables)
        j["tables"].push_back({{"name", t.name}, {"metadata", pairs_json(t.metadata)}, {"columns", t.columns}});
    return j;
}

json to_json(const Report& report)
{
    json j = metadata_json(report);
    for (std::size_t i = 0; i < report.tables.size(); ++i) {
        json rows = json::array();
        for (const auto& row : report.tables[i].rows) {
            json r = json::array();
            for (const auto& c : row)
                r.push_back(cell_json(c));
            rows.push_back(std::move(r));
        }
        j["tables"][i]["rows"] = std::move(rows);
    }
    return j;
}

void write_json(std::ostream& out, const Report& report)
{
    out << to_json(report).dump(1) << '\n';
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
            continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2)
        return nan;
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? nan : (n * sxy - sx * sy) / denom;
}

}  // namespace polarcav::cli
