#include "homog/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key at line " +
                                                     std::to_string(lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (c.kv_.count(full))
            throw std::invalid_argument("config: duplicate key " + full);
        c.kv_[full] = val;
    }
    return c;
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
        throw std::invalid_argument("config: bad number for " + key + ": " + it->second);
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, fallback);
    if (v != std::floor(v)) throw std::invalid_argument("config: expected integer for " + key);
    return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoull(it->second);
}

std::vector<double> Config::get_list(const std::string& key,
                                     std::vector<double> fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

std::vector<std::pair<double, double>> Config::get_points(
    const std::string& key, std::vector<std::pair<double, double>> fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<std::pair<double, double>> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("config: points need t:x pairs, got " + tok);
        out.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    if (out.empty()) throw std::invalid_argument("config: empty points for " + key);
    return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
    std::string bad;
    for (const auto& [k, v] : kv_)
        if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty()) throw std::invalid_argument("config: unknown keys: " + bad);
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
    return out;
}

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "field.kernel",      "field.a_marginal", "field.a_lo",     "field.a_hi",
        "field.a_p",         "field.c_marginal", "field.sigma",    "field.range",
        "run.epsilons",      "run.points",       "run.g",          "run.n_fields",
        "run.n_paths",       "run.n_w",          "run.c_dt",       "run.dt_limit",
        "run.delta_bin",     "run.delta_w",      "run.pde_dt",     "run.trunc_tol",
        "run.n_moll",        "run.gamma",        "run.xi_radius",  "run.seed",
        "run.workers",       "run.out_dir"};
    return keys;
}

void ExperimentConfig::validate() const {
    field.validate();
    if (epsilons.empty()) throw std::invalid_argument("experiment: empty eps ladder");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0))
            throw std::invalid_argument("experiment: eps values must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("experiment: eps ladder must be strictly decreasing");
    }
    if (points.empty()) throw std::invalid_argument("experiment: need at least one (t, x) point");
    for (auto [t, x] : points)
        if (!(t > 0.0)) throw std::invalid_argument("experiment: evaluation times must be > 0");
    if (n_fields < 2 || n_paths < 2 || n_w < 2)
        throw std::invalid_argument("experiment: sample budgets below the documented minimum (2)");
    if (!(c_dt > 0.0 && c_dt <= 0.05))
        throw std::invalid_argument("experiment: c_dt outside (0, 0.05]");
    if (workers < 1) throw std::invalid_argument("experiment: workers must be >= 1");
}

ExperimentConfig experiment_config_from(const Config& cfg, const std::string& experiment) {
    cfg.require_known(known_config_keys());
    ExperimentConfig e;
    e.name = experiment;

    const std::string kern = cfg.get_string("field.kernel", "box");
    if (kern == "box")
        e.field.kernel = KernelKind::box;
    else if (kern == "triangle")
        e.field.kernel = KernelKind::triangle;
    else
        throw std::invalid_argument("config: field.kernel must be box or triangle");

    const std::string am = cfg.get_string("field.a_marginal", "two_point");
    if (am == "two_point")
        e.field.a_marginal = AMarginal::two_point;
    else if (am == "uniform")
        e.field.a_marginal = AMarginal::uniform_interval;
    else
        throw std::invalid_argument("config: field.a_marginal must be two_point or uniform");

    const std::string cm = cfg.get_string("field.c_marginal", "rademacher");
    if (cm == "rademacher")
        e.field.c_marginal = CMarginal::rademacher;
    else if (cm == "uniform_sym")
        e.field.c_marginal = CMarginal::uniform_sym;
    else
        throw std::invalid_argument("config: field.c_marginal must be rademacher or uniform_sym");

    e.field.a_lo = cfg.get_double("field.a_lo", e.field.a_lo);
    e.field.a_hi = cfg.get_double("field.a_hi", e.field.a_hi);
    e.field.a_p = cfg.get_double("field.a_p", e.field.a_p);
    e.field.sigma = cfg.get_double("field.sigma", e.field.sigma);
    e.field.range = cfg.get_double("field.range", e.field.range);

    e.epsilons = cfg.get_list("run.epsilons", e.epsilons);
    e.points = cfg.get_points("run.points", e.points);
    e.g_name = cfg.get_string("run.g", e.g_name);
    e.n_fields = cfg.get_int("run.n_fields", e.n_fields);
    e.n_paths = cfg.get_int("run.n_paths", e.n_paths);
    e.n_w = cfg.get_int("run.n_w", e.n_w);
    e.c_dt = cfg.get_double("run.c_dt", e.c_dt);
    e.dt_limit = cfg.get_double("run.dt_limit", e.dt_limit);
    e.delta_bin = cfg.get_double("run.delta_bin", e.delta_bin);
    e.delta_w = cfg.get_double("run.delta_w", e.delta_w);
    e.pde_dt = cfg.get_double("run.pde_dt", e.pde_dt);
    e.trunc_tol = cfg.get_double("run.trunc_tol", e.trunc_tol);
    e.n_moll = cfg.get_int("run.n_moll", e.n_moll);
    e.gamma = cfg.get_double("run.gamma", e.gamma);
    e.xi_radius = cfg.get_double("run.xi_radius", e.xi_radius);
    e.seed = cfg.get_u64("run.seed", e.seed);
    e.workers = cfg.get_int("run.workers", e.workers);
    e.out_dir = cfg.get_string("run.out_dir", e.out_dir);
    e.validate();
    return e;
}

std::function<double(double)> make_g(const std::string& name_or_csv) {
    if (name_or_csv == "gaussian_bump") return [](double x) { return std::exp(-x * x); };
    if (name_or_csv == "compact_bump")
        return [](double x) {
            const double y = x / 2.0;
            return std::abs(y) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0;
        };
    if (name_or_csv == "indicator_smoothed")
        return [](double x) { return 0.5 * (1.0 + std::tanh((1.0 - std::abs(x)) / 0.1)); };
    // otherwise a CSV profile: lines of "x,value", linearly interpolated
    std::ifstream in(name_or_csv);
    if (!in)
        throw std::invalid_argument("make_g: unknown builtin and unreadable file: " +
                                    name_or_csv);
    auto xs = std::make_shared<std::vector<double>>();
    auto vs = std::make_shared<std::vector<double>>();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("make_g: profile lines must be x,value");
        xs->push_back(std::stod(line.substr(0, comma)));
        vs->push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs->size() < 2) throw std::invalid_argument("make_g: profile needs >= 2 rows");
    for (std::size_t i = 1; i < xs->size(); ++i)
        if (!((*xs)[i] > (*xs)[i - 1]))
            throw std::invalid_argument("make_g: profile x must be strictly increasing");
    return [xs, vs](double x) {
        if (x <= xs->front()) return vs->front();
        if (x >= xs->back()) return vs->back();
        const auto it = std::upper_bound(xs->begin(), xs->end(), x);
        const auto j = static_cast<std::size_t>(it - xs->begin()) - 1;
        const double f = (x - (*xs)[j]) / ((*xs)[j + 1] - (*xs)[j]);
        return (*vs)[j] * (1.0 - f) + (*vs)[j + 1] * f;
    };
}

}  // namespace homog
