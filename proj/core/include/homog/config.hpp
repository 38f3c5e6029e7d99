#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "homog/field.hpp"

namespace homog {

/// Flat `key = value` configuration with [section] headers. Keys are stored
/// as "section.key". Unknown keys are hard errors at validation time: a
/// silent typo would invalidate a study.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
    /// "t:x, t:x, ..." pairs
    std::vector<std::pair<double, double>> get_points(
        const std::string& key, std::vector<std::pair<double, double>> fallback) const;

    /// throws std::invalid_argument naming every unknown key
    void require_known(const std::set<std::string>& allowed) const;
    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::string canonical_text() const;  // sorted key=value lines (for hashing)

private:
    std::map<std::string, std::string> kv_;
};

/// Orchestration parameters for one experiment run over the product
/// randomness (outer field realizations, inner paths / Wiener draws).
struct ExperimentConfig {
    std::string name;
    FieldSpec field;
    std::vector<double> epsilons = {0.4, 0.2, 0.1, 0.05};
    std::vector<std::pair<double, double>> points = {{0.5, 0.0}};  // (t, x)
    std::string g_name = "gaussian_bump";

    int n_fields = 2000;
    int n_paths = 2000;
    int n_w = 500;

    double c_dt = 0.005;       // quenched step bound constant
    double dt_limit = 1e-3;    // limit-path step
    double delta_bin = 0.02;   // local-time bin width
    double delta_w = 0.01;     // Wiener grid step
    double pde_dt = 5e-4;      // PDE time step
    double trunc_tol = 1e-6;   // domain truncation budget
    int n_moll = 64;           // mollification index
    double gamma = 0.25;       // xi diagnostic exponent
    double xi_radius = 1000.0; // xi sup truncation

    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";

    void validate() const;  // budget minima, ordering of the eps ladder
};

/// Parse + validate an ExperimentConfig for the named experiment; unknown
/// keys rejected. CLI overrides (seed/workers/out) are applied afterwards.
ExperimentConfig experiment_config_from(const Config& cfg, const std::string& experiment);

/// documented key set (README carries the same list)
const std::set<std::string>& known_config_keys();

std::function<double(double)> make_g(const std::string& name_or_csv);

}  // namespace homog
