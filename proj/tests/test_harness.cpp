#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "homog/config.hpp"
#include "homog/experiments.hpp"
#include "homog/parallel.hpp"
#include "homog/report.hpp"

using namespace homog;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// body = everything except '#' comment lines
std::string csv_body(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

// minimal XML well-formedness scan: tag balance and quote closure
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    if (text.rfind("<?xml", 0) == 0) i = text.find("?>") + 2;
    while (i < text.size()) {
        const auto open = text.find('<', i);
        if (open == std::string::npos) break;
        const auto close = text.find('>', open);
        if (close == std::string::npos) return false;
        std::string tag = text.substr(open + 1, close - open - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag.back() == '/') continue;  // self-closing
        if (tag.front() == '/') {
            const std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else {
            const auto sp = tag.find_first_of(" \t\n");
            stack.push_back(sp == std::string::npos ? tag : tag.substr(0, sp));
        }
    }
    return stack.empty();
}

}  // namespace

TEST_CASE("config parsing: sections, comments, lists, points") {
    const Config c = Config::parse_string(
        "# comment\n[field]\nkernel = box\nsigma = 0.5\n\n[run]\n"
        "epsilons = 0.4, 0.2, 0.1\npoints = 0.5:0, 0.25:0.5\nseed = 99\n");
    CHECK(c.get_string("field.kernel", "") == "box");
    CHECK(c.get_double("field.sigma", 0) == 0.5);
    CHECK(c.get_list("run.epsilons", {}) == std::vector<double>{0.4, 0.2, 0.1});
    const auto pts = c.get_points("run.points", {});
    CHECK(pts.size() == 2);
    CHECK(pts[1].first == 0.25);
    CHECK(pts[1].second == 0.5);
    CHECK(c.get_u64("run.seed", 0) == 99);
}

TEST_CASE("unknown keys are hard errors") {
    const Config c = Config::parse_string("[run]\nseeed = 3\n");
    CHECK_THROWS_AS(c.require_known(known_config_keys()), std::invalid_argument);
    const Config ok = Config::parse_string("[run]\nseed = 3\n");
    CHECK_NOTHROW(ok.require_known(known_config_keys()));
    CHECK_THROWS_AS(Config::parse_string("[run]\nseed = 3\nseed = 4\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("nonsense line\n"), std::invalid_argument);
}

TEST_CASE("experiment config: ladder ordering and budget minima enforced") {
    const Config bad = Config::parse_string("[run]\nepsilons = 0.1, 0.2\n");
    CHECK_THROWS_AS(experiment_config_from(bad, "exp_main"), std::invalid_argument);
    const Config neg = Config::parse_string("[run]\nepsilons = 0.2, -0.1\n");
    CHECK_THROWS_AS(experiment_config_from(neg, "exp_main"), std::invalid_argument);
    const Config small = Config::parse_string("[run]\nn_paths = 1\n");
    CHECK_THROWS_AS(experiment_config_from(small, "exp_main"), std::invalid_argument);
}

TEST_CASE("builtin g functions and CSV profiles") {
    CHECK(make_g("gaussian_bump")(0.0) == 1.0);
    CHECK(make_g("compact_bump")(0.0) == doctest::Approx(1.0));
    CHECK(make_g("compact_bump")(2.5) == 0.0);
    CHECK(make_g("indicator_smoothed")(0.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(make_g("indicator_smoothed")(3.0) == doctest::Approx(0.0).epsilon(1e-4));

    const std::string path = "/tmp/homog_test_profile.csv";
    std::ofstream(path) << "0,1\n1,2\n2,0\n";
    const auto g = make_g(path);
    CHECK(g(0.5) == doctest::Approx(1.5));
    CHECK(g(-3.0) == 1.0);
    CHECK(g(9.0) == 0.0);
    CHECK_THROWS_AS(make_g("no_such_builtin_or_file"), std::invalid_argument);
}

TEST_CASE("parallel_map: ordered results and error propagation") {
    const auto sq = parallel_map<int>(100, 4, [](std::size_t i) {
        return static_cast<int>(i * i);
    });
    for (std::size_t i = 0; i < 100; ++i) CHECK(sq[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(parallel_map<int>(50, 4,
                                      [](std::size_t i) -> int {
                                          if (i == 33) throw std::runtime_error("worker died");
                                          return 0;
                                      }),
                    std::runtime_error);
}

TEST_CASE("results are identical across worker counts") {
    ExperimentConfig cfg = default_experiment_config("exp_field_clt");
    cfg.n_fields = 200;
    cfg.epsilons = {0.2};
    cfg.seed = 5;
    cfg.workers = 1;
    const ExperimentReport r1 = run_experiment(cfg);
    cfg.workers = 3;
    const ExperimentReport r3 = run_experiment(cfg);
    REQUIRE(r1.rows.size() == r3.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].value == r3.rows[i].value);
        CHECK(r1.rows[i].se == r3.rows[i].se);
    }
}

TEST_CASE("repeat run with the same seed gives byte-identical CSV bodies") {
    ExperimentConfig cfg = default_experiment_config("exp_xi_diag");
    cfg.n_fields = 50;
    cfg.epsilons = {0.2, 0.1};
    cfg.xi_radius = 50.0;
    cfg.seed = 11;
    cfg.workers = 2;
    const std::string d1 = "/tmp/homog_rep1", d2 = "/tmp/homog_rep2";
    emit_report(run_experiment(cfg), d1);
    emit_report(run_experiment(cfg), d2);
    CHECK(csv_body(slurp(d1 + "/results.csv")) == csv_body(slurp(d2 + "/results.csv")));
    CHECK(csv_body(slurp(d1 + "/verdicts.csv")) == csv_body(slurp(d2 + "/verdicts.csv")));
    CHECK(csv_body(slurp(d1 + "/results.csv")).size() > 50);
}

TEST_CASE("CSV schemas match the documented headers") {
    ExperimentConfig cfg = default_experiment_config("exp_xi_diag");
    cfg.n_fields = 20;
    cfg.epsilons = {0.2};
    cfg.xi_radius = 20.0;
    cfg.workers = 2;
    const std::string dir = "/tmp/homog_schema";
    emit_report(run_experiment(cfg), dir);
    const std::string res = csv_body(slurp(dir + "/results.csv"));
    CHECK(res.rfind("experiment,epsilon,t,x,statistic_name,value,se\n", 0) == 0);
    const std::string ver = csv_body(slurp(dir + "/verdicts.csv"));
    CHECK(ver.rfind("criterion_id,measured,threshold,pass\n", 0) == 0);
}

TEST_CASE("SVG plots are well-formed XML") {
    CurveSpec c{"demo_curve", "value", {{0.4, 1.0}, {0.2, 0.8}, {0.1, 0.75}}};
    const std::string svg = render_curve_svg(c);
    CHECK(xml_well_formed(svg));
    ExperimentConfig cfg = default_experiment_config("exp_xi_diag");
    cfg.n_fields = 20;
    cfg.epsilons = {0.2, 0.1};
    cfg.xi_radius = 20.0;
    cfg.workers = 2;
    const std::string dir = "/tmp/homog_svg";
    emit_report(run_experiment(cfg), dir);
    CHECK(xml_well_formed(slurp(dir + "/xi_p95.svg")));
}

TEST_CASE("experiment registry covers all twelve criteria") {
    std::vector<std::string> all;
    for (const auto& info : experiment_registry())
        for (const auto& c : info.criteria) all.push_back(c);
    CHECK(all.size() == 12);
    for (int i = 1; i <= 12; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "C%02d", i);
        bool found = false;
        for (const auto& c : all) found = found || c == buf;
        CHECK(found);
    }
    CHECK_THROWS_AS(default_experiment_config("exp_nope"), std::invalid_argument);
}
