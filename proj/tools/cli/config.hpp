// config.hpp: run configuration, figure presets and the dipole-to-coupling
// helper for the polarcav command-line tool.

#pragma once

#include "polarcav/form_factor.hpp"
#include "polarcav/model.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polarcav::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { spectrum, rates, sweep, crossings, validate };
enum class OutputFormat { table, json };

[[nodiscard]] std::string to_string(Command c);
[[nodiscard]] Command parse_command(std::string_view text);

struct FormFactorSpec {
    enum class WidthReference { omega_c, omega_ext };

    FormFactorKind kind{FormFactorKind::constant};
    double exponent{0.0};
    std::optional<double> omega_ext;  ///< empty: centre on the (n,+)->(n,-) frequency
    double gamma_ext{1e-4};           ///< in units of `gamma_reference`
    WidthReference gamma_reference{WidthReference::omega_c};
    std::optional<double> cutoff;

    /// Concrete form factor for `initial` at parameter point `p`.
    [[nodiscard]] FormFactor resolve(const ModelParams& p, const StateLabel& initial) const;
};

struct GridSpec {
    double min{0.0};
    double max{3.5};
    int points{4000};
};

struct SweepSpec {
    std::string variable{"g_R"};
    double min{1e-3};
    double max{5e-2};
    int points{60};
    bool log_spacing{true};
    std::vector<double> ratios{1.0, 0.1, 0.01};  ///< g_S / g_R

    [[nodiscard]] std::vector<double> couplings() const;
};

struct CrossingSpec {
    double g_min{0.0};
    double g_max{0.3};
    int n_min{0};
    int n_max{10};
    int grid_points{2000};
    int table_points{301};
};

struct ValidateSpec {
    int fock_cutoff{40};
    double g_min{0.001};
    double g_max{0.145};
    int points{145};
    double ratio{1.0};
    std::vector<double> oracle_couplings{0.02, 0.01, 0.005, 0.0025};
    double convergence_tolerance{1e-8};
};

struct RunConfig {
    std::string preset;
    ModelParams params{};
    double unit_scale{1.0};  ///< physical value of one frequency unit, applied on output only
    std::vector<StateLabel> initial{{10, Branch::plus}};
    FormFactorSpec form_factor{};
    double base_rate{1e-3};
    GridSpec grid{};
    bool lamb_shift{false};
    SweepSpec sweep{};
    CrossingSpec crossings{};
    ValidateSpec validate{};
    double breakdown_threshold{1e-2};  ///< |norm - 1| above this marks a breakdown
    bool strict{false};
    int threads{0};  ///< 0: hardware concurrency

    /// Throws ConfigError on inconsistent values.
    void check() const;
};

[[nodiscard]] const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
[[nodiscard]] RunConfig preset(std::string_view name);

/// Applies the keys of `j` on top of `base`. Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& j, RunConfig base = {});
[[nodiscard]] RunConfig load_config_file(const std::string& path, RunConfig base = {});
/// Complete configuration; parse_config(to_json(cfg)) reproduces cfg.
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

enum class DipoleKind {
    offdiagonal,  ///< g_R, sqrt(hbar w / 2 eps0 V)
    diagonal      ///< g_S, g_S', sqrt(hbar w / 8 eps0 V)
};

/// Coupling in units of omega_c from a dipole component along the mode
/// polarization (C m), the cavity angular frequency (rad/s) and the mode
/// volume (m^3). CODATA 2018 values of hbar and epsilon_0.
[[nodiscard]] double coupling_from_dipole(double dipole, double omega_c_si, double mode_volume,
                                          DipoleKind kind);

}  // namespace polarcav::cli
