#include "homog/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace homog {

bool ExperimentReport::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const VerdictRow& v) { return v.pass; });
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

void write_provenance(std::ofstream& out, const ExperimentReport& r) {
    out << "# experiment=" << r.name << " config_hash=" << r.config_hash << " seed=" << r.seed
        << " version=" << r.version << "\n";
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# timestamp=" << buf << " runtime_s=" << format_number(r.runtime_seconds) << "\n";
}

}  // namespace

std::string render_curve_svg(const CurveSpec& curve) {
    if (curve.points.empty()) throw std::invalid_argument("render_curve_svg: empty curve");
    const int W = 640, H = 420, ml = 70, mr = 20, mt = 36, mb = 52;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto [e, v] : curve.points) {
        const double lx = std::log10(e);
        xmin = std::min(xmin, lx);
        xmax = std::max(xmax, lx);
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    const double pad = std::max(1e-12, 0.08 * (ymax - ymin));
    ymin -= pad;
    ymax += pad;
    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"white\"/>\n";
    s += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + curve.name + "</text>\n";
    // axes
    s += "<line x1=\"" + format_number(ml) + "\" y1=\"" + format_number(H - mb) + "\" x2=\"" +
         format_number(W - mr) + "\" y2=\"" + format_number(H - mb) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + format_number(ml) + "\" y1=\"" + format_number(mt) + "\" x2=\"" +
         format_number(ml) + "\" y2=\"" + format_number(H - mb) + "\" stroke=\"black\"/>\n";
    // x ticks at the data epsilons (log scale)
    for (auto [e, v] : curve.points) {
        const double x = px(std::log10(e));
        s += "<line x1=\"" + format_number(x) + "\" y1=\"" + format_number(H - mb) + "\" x2=\"" +
             format_number(x) + "\" y2=\"" + format_number(H - mb + 6) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + format_number(x) + "\" y=\"" + format_number(H - mb + 22) +
             "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
             format_number(e) + "</text>\n";
    }
    // y ticks
    for (int k = 0; k <= 4; ++k) {
        const double v = ymin + (ymax - ymin) * k / 4.0;
        const double y = py(v);
        s += "<line x1=\"" + format_number(ml - 6) + "\" y1=\"" + format_number(y) + "\" x2=\"" +
             format_number(ml) + "\" y2=\"" + format_number(y) + "\" stroke=\"black\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        s += "<text x=\"" + format_number(ml - 10) + "\" y=\"" + format_number(y + 4) +
             "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" + buf +
             "</text>\n";
    }
    s += "<text x=\"320\" y=\"" + format_number(H - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">epsilon "
         "(log scale)</text>\n";
    s += "<text x=\"16\" y=\"210\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 210)\">" + curve.y_label +
         "</text>\n";
    // polyline, drawn in descending eps order
    auto pts = curve.points;
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::string poly;
    for (auto [e, v] : pts)
        poly += format_number(px(std::log10(e))) + "," + format_number(py(v)) + " ";
    s += "<polyline fill=\"none\" stroke=\"#1f6fb0\" stroke-width=\"2\" points=\"" + poly +
         "\"/>\n";
    for (auto [e, v] : pts)
        s += "<circle cx=\"" + format_number(px(std::log10(e))) + "\" cy=\"" +
             format_number(py(v)) + "\" r=\"3.5\" fill=\"#1f6fb0\"/>\n";
    s += "</svg>\n";
    return s;
}

void emit_report(const ExperimentReport& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("emit_report: cannot create " + dir + ": " + ec.message());

    {
        std::ofstream out(dir + "/results.csv");
        if (!out) throw std::runtime_error("emit_report: cannot write results.csv");
        write_provenance(out, report);
        out << "experiment,epsilon,t,x,statistic_name,value,se\n";
        for (const auto& r : report.rows)
            out << r.experiment << ',' << format_number(r.epsilon) << ',' << format_number(r.t)
                << ',' << format_number(r.x) << ',' << r.statistic << ','
                << format_number(r.value) << ',' << format_number(r.se) << "\n";
    }
    {
        std::ofstream out(dir + "/verdicts.csv");
        if (!out) throw std::runtime_error("emit_report: cannot write verdicts.csv");
        write_provenance(out, report);
        out << "criterion_id,measured,threshold,pass\n";
        for (const auto& v : report.verdicts)
            out << v.criterion_id << ',' << format_number(v.measured) << ','
                << format_number(v.threshold) << ',' << (v.pass ? "true" : "false") << "\n";
    }
    for (const auto& c : report.curves) {
        std::string fname = c.name;
        for (auto& ch : fname)
            if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
        std::ofstream out(dir + "/" + fname + ".svg");
        if (!out) throw std::runtime_error("emit_report: cannot write curve svg");
        out << render_curve_svg(c);
    }
}

}  // namespace homog
