#include "cli/config.hpp"

#include "polarcav/emission.hpp"
#include "polarcav/perturbation.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

namespace polarcav::cli {

namespace {

using nlohmann::json;

constexpr double hbar = 1.054571817e-34;         // J s
constexpr double epsilon_0 = 8.8541878128e-12;   // F / m

void allow_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys)
{
    if (!j.is_object())
        throw ConfigError("'" + std::string(where) + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto k : keys)
            known = known || key == k;
        if (!known)
            throw ConfigError("unknown key '" + key + "' in '" + std::string(where) + "'");
    }
}

template <typename T>
void read(const json& j, std::string_view where, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + std::string(where) + "." + key + "': " + e.what());
    }
}

void read_optional(const json& j, std::string_view where, const char* key, std::optional<double>& out)
{
    if (!j.contains(key))
        return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    double v = 0.0;
    read(j, where, key, v);
    out = v;
}

StateLabel label_from_json(const json& j)
{
    try {
        if (j.is_string())
            return parse_label(j.get<std::string>());
        if (j.is_object()) {
            allow_keys(j, "initial", {"n", "s"});
            const int n = j.at("n").get<int>();
            const int s = j.at("s").get<int>();
            if (n < 0 || (s != 1 && s != -1))
                throw ConfigError("initial label needs n >= 0 and s = +1 or -1");
            return {n, s > 0 ? Branch::plus : Branch::minus};
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad initial label: ") + e.what());
    }
    throw ConfigError("initial label must be a string like \"10,+\" or {\"n\":10,\"s\":1}");
}

std::string kind_name(FormFactorKind k)
{
    switch (k) {
    case FormFactorKind::constant:
        return "constant";
    case FormFactorKind::power_law:
        return "power_law";
    case FormFactorKind::lorentzian:
        return "lorentzian";
    }
    return "?";
}

FormFactorSpec form_factor_from_json(const json& j, FormFactorSpec spec)
{
    allow_keys(j, "form_factor", {"type", "exponent", "omega_ext", "gamma_ext", "gamma_reference", "cutoff"});
    if (j.contains("type")) {
        std::string type;
        read(j, "form_factor", "type", type);
        if (type == "constant")
            spec.kind = FormFactorKind::constant;
        else if (type == "power_law")
            spec.kind = FormFactorKind::power_law;
        else if (type == "lorentzian")
            spec.kind = FormFactorKind::lorentzian;
        else
            throw ConfigError("form_factor.type must be constant, power_law or lorentzian, got '" + type + "'");
    }
    read(j, "form_factor", "exponent", spec.exponent);
    if (j.contains("omega_ext")) {
        if (j.at("omega_ext").is_string()) {
            if (j.at("omega_ext").get<std::string>() != "auto")
                throw ConfigError("form_factor.omega_ext must be a number or \"auto\"");
            spec.omega_ext.reset();
        } else {
            read_optional(j, "form_factor", "omega_ext", spec.omega_ext);
        }
    }
    read(j, "form_factor", "gamma_ext", spec.gamma_ext);
    if (j.contains("gamma_reference")) {
        std::string ref;
        read(j, "form_factor", "gamma_reference", ref);
        if (ref == "omega_c")
            spec.gamma_reference = FormFactorSpec::WidthReference::omega_c;
        else if (ref == "omega_ext")
            spec.gamma_reference = FormFactorSpec::WidthReference::omega_ext;
        else
            throw ConfigError("form_factor.gamma_reference must be omega_c or omega_ext");
    }
    read_optional(j, "form_factor", "cutoff", spec.cutoff);
    return spec;
}

void apply_dipole(const json& j, ModelParams& p)
{
    allow_keys(j, "dipole", {"d_eg", "d_ee", "d_gg", "omega_c", "mode_volume"});
    double d_eg = 0.0, d_ee = 0.0, d_gg = 0.0, omega = 0.0, volume = 0.0;
    read(j, "dipole", "d_eg", d_eg);
    read(j, "dipole", "d_ee", d_ee);
    read(j, "dipole", "d_gg", d_gg);
    read(j, "dipole", "omega_c", omega);
    read(j, "dipole", "mode_volume", volume);
    try {
        p.g_R = coupling_from_dipole(d_eg, omega, volume, DipoleKind::offdiagonal) * p.omega_c;
        p.g_S = coupling_from_dipole(d_ee, omega, volume, DipoleKind::diagonal) * p.omega_c;
        p.g_S_prime = coupling_from_dipole(d_gg, omega, volume, DipoleKind::diagonal) * p.omega_c;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("dipole: ") + e.what());
    }
}

}  // namespace

std::string to_string(Command c)
{
    switch (c) {
    case Command::spectrum:
        return "spectrum";
    case Command::rates:
        return "rates";
    case Command::sweep:
        return "sweep";
    case Command::crossings:
        return "crossings";
    case Command::validate:
        return "validate";
    }
    return "?";
}

Command parse_command(std::string_view text)
{
    for (auto c : {Command::spectrum, Command::rates, Command::sweep, Command::crossings, Command::validate})
        if (text == to_string(c))
            return c;
    throw ConfigError("unknown command '" + std::string(text) + "'");
}

FormFactor FormFactorSpec::resolve(const ModelParams& p, const StateLabel& initial) const
{
    FormFactor ff = FormFactor::constant(p.omega_c);
    switch (kind) {
    case FormFactorKind::constant:
        break;
    case FormFactorKind::power_law:
        ff = FormFactor::power_law(exponent, p.omega_c);
        break;
    case FormFactorKind::lorentzian: {
        double centre = 0.0;
        if (omega_ext) {
            centre = *omega_ext;
        } else {
            if (initial.n < 1)
                throw ConfigError("automatic Lorentzian centre needs an initial manifold n >= 1");
            const StateLabel up{initial.n, Branch::plus};
            const StateLabel down{initial.n, Branch::minus};
            centre = energy_with_correction(up, p).total() - energy_with_correction(down, p).total();
        }
        const double width = gamma_ext * (gamma_reference == WidthReference::omega_c ? p.omega_c : centre);
        ff = FormFactor::lorentzian(centre, width, p.omega_c);
        break;
    }
    }
    if (cutoff)
        ff = ff.with_cutoff(*cutoff);
    return ff;
}

std::vector<double> SweepSpec::couplings() const
{
    std::vector<double> out;
    if (points == 1)
        return {min};
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        out.push_back(log_spacing ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                                  : min + t * (max - min));
    }
    out.front() = min;
    out.back() = max;
    return out;
}

void RunConfig::check() const
{
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    if (!(unit_scale > 0.0))
        throw ConfigError("unit_scale must be positive");
    if (initial.empty())
        throw ConfigError("at least one initial state is required");
    if (!(base_rate > 0.0))
        throw ConfigError("base_rate must be positive");
    if (grid.points < 2 || !(grid.max > grid.min))
        throw ConfigError("grid needs points >= 2 and max > min");
    if (sweep.variable != "g_R")
        throw ConfigError("sweep.variable must be g_R (g_S follows through the ratio)");
    if (sweep.points < 1 || !(sweep.min > 0.0) || sweep.max < sweep.min)
        throw ConfigError("sweep needs points >= 1 and 0 < min <= max");
    if (sweep.ratios.empty())
        throw ConfigError("sweep.ratios must not be empty");
    for (double r : sweep.ratios)
        if (!(r >= 0.0))
            throw ConfigError("sweep.ratios must be nonnegative");
    if (crossings.n_max < 2 || crossings.n_min < 0 || crossings.n_min >= crossings.n_max ||
        crossings.grid_points < 2 || crossings.table_points < 2 || !(crossings.g_max > crossings.g_min))
        throw ConfigError("crossings needs 0 <= n_min < n_max, n_max >= 2, g_max > g_min, >= 2 points");
    if (validate.points < 2 || !(validate.g_max > validate.g_min) || validate.fock_cutoff < 1)
        throw ConfigError("validate needs points >= 2, g_max > g_min and fock_cutoff >= 1");
    if (form_factor.kind == FormFactorKind::lorentzian && !(form_factor.gamma_ext > 0.0))
        throw ConfigError("form_factor.gamma_ext must be positive");
    if (threads < 0)
        throw ConfigError("threads must be >= 0");
}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{
        "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d",
        "fig4e", "fig4f", "fig5a", "fig5b", "fig5c", "fig5d", "appendixA"};
    return names;
}

RunConfig preset(std::string_view name)
{
    RunConfig cfg;
    cfg.preset = std::string(name);
    cfg.params = ModelParams{1.0, 1.0, 0.01, 0.01, 0.0};
    cfg.initial = {{10, Branch::plus}};
    cfg.base_rate = 1e-3;

    const auto detuned = [&cfg] { cfg.params.omega_a = 0.8; };
    const auto constant = [&cfg] { cfg.form_factor.kind = FormFactorKind::constant; };
    const auto omega_squared = [&cfg] {
        cfg.form_factor.kind = FormFactorKind::power_law;
        cfg.form_factor.exponent = 2.0;
    };
    const auto engineered = [&cfg] {
        cfg.form_factor.kind = FormFactorKind::lorentzian;
        cfg.form_factor.omega_ext.reset();
        cfg.form_factor.gamma_ext = 1e-4;
        cfg.form_factor.gamma_reference = FormFactorSpec::WidthReference::omega_c;
    };

    if (name == "fig2a" || name == "fig2b") {
        cfg.crossings = CrossingSpec{0.0, 0.3, 7, 10, 2000, 301};
        if (name == "fig2b")
            detuned();
    } else if (name == "fig3a" || name == "fig3b") {
        cfg.initial = {{10, Branch::plus}, {10, Branch::minus}};
        cfg.grid = GridSpec{0.0, 3.5, 4000};
        if (name == "fig3a")
            omega_squared();
        else
            constant();
    } else if (name.size() == 5 && name.substr(0, 4) == "fig4" && name[4] >= 'a' && name[4] <= 'f') {
        const char panel = name[4];
        if (panel >= 'd')
            detuned();
        switch ((panel - 'a') % 3) {
        case 0:
            constant();
            break;
        case 1:
            omega_squared();
            break;
        default:
            engineered();
            break;
        }
    } else if (name.size() == 5 && name.substr(0, 4) == "fig5" && name[4] >= 'a' && name[4] <= 'd') {
        // (a)/(b) group totals, (c)/(d) individual AS channels: same sweep table
        constant();
        cfg.sweep.ratios = {1.0};
        if (name[4] == 'b' || name[4] == 'd')
            detuned();
    } else if (name == "appendixA") {
        cfg.validate = ValidateSpec{};
    } else {
        std::string known;
        for (const auto& n : preset_names())
            known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
    }
    return cfg;
}

RunConfig parse_config(const json& j, RunConfig cfg)
{
    allow_keys(j, "config", {"preset", "params", "dipole", "unit_scale", "initial", "form_factor", "base_rate",
                             "grid", "lamb_shift", "sweep", "crossings", "validate", "breakdown_threshold",
                             "strict", "threads"});
    if (j.contains("preset")) {
        std::string name;
        read(j, "config", "preset", name);
        if (!name.empty())
            cfg = preset(name);
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        allow_keys(p, "params", {"omega_c", "omega_a", "g_R", "g_S", "g_S_prime"});
        read(p, "params", "omega_c", cfg.params.omega_c);
        read(p, "params", "omega_a", cfg.params.omega_a);
        read(p, "params", "g_R", cfg.params.g_R);
        read(p, "params", "g_S", cfg.params.g_S);
        read(p, "params", "g_S_prime", cfg.params.g_S_prime);
    }
    if (j.contains("dipole"))
        apply_dipole(j.at("dipole"), cfg.params);
    read(j, "config", "unit_scale", cfg.unit_scale);
    if (j.contains("initial")) {
        const auto& init = j.at("initial");
        cfg.initial.clear();
        if (init.is_array()) {
            for (const auto& item : init)
                cfg.initial.push_back(label_from_json(item));
        } else {
            cfg.initial.push_back(label_from_json(init));
        }
    }
    if (j.contains("form_factor"))
        cfg.form_factor = form_factor_from_json(j.at("form_factor"), cfg.form_factor);
    read(j, "config", "base_rate", cfg.base_rate);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        allow_keys(g, "grid", {"min", "max", "points"});
        read(g, "grid", "min", cfg.grid.min);
        read(g, "grid", "max", cfg.grid.max);
        read(g, "grid", "points", cfg.grid.points);
    }
    read(j, "config", "lamb_shift", cfg.lamb_shift);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        allow_keys(s, "sweep", {"variable", "min", "max", "points", "spacing", "ratios"});
        read(s, "sweep", "variable", cfg.sweep.variable);
        read(s, "sweep", "min", cfg.sweep.min);
        read(s, "sweep", "max", cfg.sweep.max);
        read(s, "sweep", "points", cfg.sweep.points);
        if (s.contains("spacing")) {
            std::string spacing;
            read(s, "sweep", "spacing", spacing);
            if (spacing != "log" && spacing != "linear")
                throw ConfigError("sweep.spacing must be log or linear");
            cfg.sweep.log_spacing = spacing == "log";
        }
        read(s, "sweep", "ratios", cfg.sweep.ratios);
    }
    if (j.contains("crossings")) {
        const auto& c = j.at("crossings");
        allow_keys(c, "crossings", {"g_min", "g_max", "n_min", "n_max", "grid_points", "table_points"});
        read(c, "crossings", "g_min", cfg.crossings.g_min);
        read(c, "crossings", "g_max", cfg.crossings.g_max);
        read(c, "crossings", "n_min", cfg.crossings.n_min);
        read(c, "crossings", "n_max", cfg.crossings.n_max);
        read(c, "crossings", "grid_points", cfg.crossings.grid_points);
        read(c, "crossings", "table_points", cfg.crossings.table_points);
    }
    if (j.contains("validate")) {
        const auto& v = j.at("validate");
        allow_keys(v, "validate",
                   {"fock_cutoff", "g_min", "g_max", "points", "ratio", "oracle_couplings", "convergence_tolerance"});
        read(v, "validate", "fock_cutoff", cfg.validate.fock_cutoff);
        read(v, "validate", "g_min", cfg.validate.g_min);
        read(v, "validate", "g_max", cfg.validate.g_max);
        read(v, "validate", "points", cfg.validate.points);
        read(v, "validate", "ratio", cfg.validate.ratio);
        read(v, "validate", "oracle_couplings", cfg.validate.oracle_couplings);
        read(v, "validate", "convergence_tolerance", cfg.validate.convergence_tolerance);
    }
    read(j, "config", "breakdown_threshold", cfg.breakdown_threshold);
    read(j, "config", "strict", cfg.strict);
    read(j, "config", "threads", cfg.threads);
    cfg.check();
    return cfg;
}

RunConfig load_config_file(const std::string& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return parse_config(j, std::move(base));
}

json to_json(const RunConfig& cfg)
{
    json j;
    if (!cfg.preset.empty())
        j["preset"] = cfg.preset;
    j["params"] = {{"omega_c", cfg.params.omega_c},
                   {"omega_a", cfg.params.omega_a},
                   {"g_R", cfg.params.g_R},
                   {"g_S", cfg.params.g_S},
                   {"g_S_prime", cfg.params.g_S_prime}};
    j["unit_scale"] = cfg.unit_scale;
    j["initial"] = json::array();
    for (const auto& l : cfg.initial)
        j["initial"].push_back(polarcav::to_string(l));
    json ff{{"type", kind_name(cfg.form_factor.kind)},
            {"exponent", cfg.form_factor.exponent},
            {"gamma_ext", cfg.form_factor.gamma_ext},
            {"gamma_reference",
             cfg.form_factor.gamma_reference == FormFactorSpec::WidthReference::omega_c ? "omega_c" : "omega_ext"}};
    ff["omega_ext"] = cfg.form_factor.omega_ext ? json(*cfg.form_factor.omega_ext) : json("auto");
    ff["cutoff"] = cfg.form_factor.cutoff ? json(*cfg.form_factor.cutoff) : json(nullptr);
    j["form_factor"] = ff;
    j["base_rate"] = cfg.base_rate;
    j["grid"] = {{"min", cfg.grid.min}, {"max", cfg.grid.max}, {"points", cfg.grid.points}};
    j["lamb_shift"] = cfg.lamb_shift;
    j["sweep"] = {{"variable", cfg.sweep.variable}, {"min", cfg.sweep.min},
                  {"max", cfg.sweep.max},           {"points", cfg.sweep.points},
                  {"spacing", cfg.sweep.log_spacing ? "log" : "linear"},
                  {"ratios", cfg.sweep.ratios}};
    j["crossings"] = {{"g_min", cfg.crossings.g_min},
                      {"g_max", cfg.crossings.g_max},
                      {"n_min", cfg.crossings.n_min},
                      {"n_max", cfg.crossings.n_max},
                      {"grid_points", cfg.crossings.grid_points},
                      {"table_points", cfg.crossings.table_points}};
    j["validate"] = {{"fock_cutoff", cfg.validate.fock_cutoff},
                     {"g_min", cfg.validate.g_min},
                     {"g_max", cfg.validate.g_max},
                     {"points", cfg.validate.points},
                     {"ratio", cfg.validate.ratio},
                     {"oracle_couplings", cfg.validate.oracle_couplings},
                     {"convergence_tolerance", cfg.validate.convergence_tolerance}};
    j["breakdown_threshold"] = cfg.breakdown_threshold;
    j["strict"] = cfg.strict;
    j["threads"] = cfg.threads;
    return j;
}

double coupling_from_dipole(double dipole, double omega_c_si, double mode_volume, DipoleKind kind)
{
    if (!(omega_c_si > 0.0) || !(mode_volume > 0.0))
        throw std::invalid_argument("cavity frequency and mode volume must be positive");
    const double k = kind == DipoleKind::offdiagonal ? 2.0 : 8.0;
    const double field = std::sqrt(hbar * omega_c_si / (k * epsilon_0 * mode_volume));
    return std::abs(dipole) * field / (hbar * omega_c_si);
}

}  // namespace polarcav::cli
