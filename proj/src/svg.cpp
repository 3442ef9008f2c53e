#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "model_search.hpp"
#include "responders.hpp"

namespace pcitk {

namespace {

const char* kGood = "#2a9d8f";
const char* kBad = "#e76f51";
const char* kRare = "#8d99ae";
const char* kTreated = "#1f77b4";
const char* kControl = "#d62728";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string num_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct Frame {
    double x0, y0, w, h;      // pixel box of the plotting area
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void open_doc(std::string& s, int w, int h) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void text(std::string& s, double x, double y, const std::string& t, const std::string& attrs = "") {
    s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" " + attrs + ">" + t + "</text>\n";
}

void line(std::string& s, double x1, double y1, double x2, double y2, const std::string& style) {
    s += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" " + style + "/>\n";
}

void axes(std::string& s, const Frame& f, const std::vector<double>& xticks,
          const std::vector<double>& yticks, const std::string& xlab, const std::string& ylab) {
    const std::string st = "stroke=\"#333\" stroke-width=\"1\"";
    line(s, f.x0, f.y0 + f.h, f.x0 + f.w, f.y0 + f.h, st);
    line(s, f.x0, f.y0, f.x0, f.y0 + f.h, st);
    for (double t : xticks) {
        const double x = f.px(t);
        line(s, x, f.y0 + f.h, x, f.y0 + f.h + 4, st);
        text(s, x, f.y0 + f.h + 18, num_label(t), "text-anchor=\"middle\"");
    }
    for (double t : yticks) {
        const double y = f.py(t);
        line(s, f.x0 - 4, y, f.x0, y, st);
        text(s, f.x0 - 8, y + 4, num_label(t), "text-anchor=\"end\"");
    }
    text(s, f.x0 + f.w / 2, f.y0 + f.h + 36, xlab, "text-anchor=\"middle\"");
    text(s, 16, f.y0 + f.h / 2, ylab,
         "text-anchor=\"middle\" transform=\"rotate(-90 16 " + num(f.y0 + f.h / 2) + ")\"");
}

void polyline(std::string& s, const std::vector<std::pair<double, double>>& pts,
              const std::string& color, double width, const std::string& extra = "") {
    if (pts.empty()) return;
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\" " +
         extra + " points=\"";
    for (const auto& [x, y] : pts) s += num(x) + "," + num(y) + " ";
    s += "\"/>\n";
}

}  // namespace

std::string svg_pci_by_size(const SearchResult& sr) {
    const int W = 640, H = 420;
    std::string s;
    open_doc(s, W, H);
    text(s, W / 2.0, 24, "Best-subset prediction accuracy by model size",
         "text-anchor=\"middle\" font-size=\"15\"");

    const int p = static_cast<int>(sr.champions.size());
    Frame f{60, 40, W - 90.0, H - 110.0, 0.5, p + 0.5, 0.0, 1.0};

    std::vector<double> xticks;
    for (int k = 1; k <= p; ++k) xticks.push_back(k);
    axes(s, f, xticks, {0.0, 0.25, 0.5, 0.75, 1.0}, "number of predictors", "PCI");

    const double ty = f.py(sr.threshold);
    line(s, f.x0, ty, f.x0 + f.w, ty, "stroke=\"#999\" stroke-dasharray=\"6 4\"");
    text(s, f.x0 + f.w - 4, ty - 6, "threshold " + num_label(sr.threshold),
         "text-anchor=\"end\" fill=\"#777\"");

    std::vector<std::pair<double, double>> means;
    for (int k = 1; k <= p; ++k) {
        const auto& champ = sr.champions[static_cast<std::size_t>(k - 1)];
        if (!champ) continue;
        const double x = f.px(k);
        line(s, x, f.py(champ->pci_min), x, f.py(champ->pci_max),
             "stroke=\"#1f77b4\" stroke-width=\"2\"");
        means.emplace_back(x, f.py(champ->pci_mean));
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(f.py(champ->pci_mean)) +
             "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    }
    polyline(s, means, "#1f77b4", 1.5);

    if (sr.selected) {
        const double x = f.px(static_cast<double>(sr.selected->subset.size()));
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(f.py(sr.selected->pci_mean)) +
             "\" r=\"7\" fill=\"none\" stroke=\"" + std::string(kGood) + "\" stroke-width=\"2\"/>\n";
        text(s, x, f.py(sr.selected->pci_mean) - 12,
             "selected: " + subset_label(sr.selected->mask, sr.predictor_names),
             "text-anchor=\"middle\" fill=\"" + std::string(kGood) + "\"");
    }
    s += "</svg>\n";
    return s;
}

std::string svg_success_curves(const std::vector<SuccessCurve>& curves) {
    const int W = 640, H = 420;
    std::string s;
    open_doc(s, W, H);
    text(s, W / 2.0, 24, "Probability of treatment success across correlations",
         "text-anchor=\"middle\" font-size=\"15\"");

    Frame f{60, 40, W - 90.0, H - 110.0, -1.0, 1.0, 0.0, 1.0};
    axes(s, f, {-1.0, -0.5, 0.0, 0.5, 1.0}, {0.0, 0.25, 0.5, 0.75, 1.0},
         "correlation between potential outcomes", "P(success)");
    line(s, f.x0, f.py(0.5), f.x0 + f.w, f.py(0.5), "stroke=\"#999\" stroke-dasharray=\"6 4\"");

    for (const auto& c : curves) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(c.rho.size());
        for (std::size_t i = 0; i < c.rho.size(); ++i)
            pts.emplace_back(f.px(c.rho[i]), f.py(c.prob_by_rho[i]));
        const char* color = c.classification == ResponderClass::Good
                                ? kGood
                                : (c.classification == ResponderClass::Bad ? kBad : kRare);
        polyline(s, pts, color, 1.2, "stroke-opacity=\"0.8\"");
    }

    const double ly = f.y0 + 8;
    text(s, f.x0 + 8, ly, "good", "fill=\"" + std::string(kGood) + "\"");
    text(s, f.x0 + 52, ly, "rare", "fill=\"" + std::string(kRare) + "\"");
    text(s, f.x0 + 92, ly, "bad", "fill=\"" + std::string(kBad) + "\"");
    s += "</svg>\n";
    return s;
}

namespace {

void km_step_path(std::string& s, const Frame& f, const nlohmann::json& km, const char* color) {
    if (km.is_null()) return;
    std::vector<std::pair<double, double>> pts;
    double px = 0.0, py = 1.0;
    pts.emplace_back(f.px(px), f.py(py));
    const auto& times = km.at("event_times");
    const auto& surv = km.at("survival");
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i].get<double>();
        const double v = surv[i].get<double>();
        pts.emplace_back(f.px(t), f.py(py));
        pts.emplace_back(f.px(t), f.py(v));
        px = t;
        py = v;
    }
    pts.emplace_back(f.px(f.xmax), f.py(py));
    polyline(s, pts, color, 1.8);
}

void at_risk_row(std::string& s, const Frame& f, const nlohmann::json& km, double y,
                 const char* color, const std::string& label) {
    text(s, f.x0 - 8, y, label, "text-anchor=\"end\" fill=\"" + std::string(color) + "\" font-size=\"10\"");
    if (km.is_null()) return;
    const auto& times = km.at("event_times");
    const auto& risk = km.at("at_risk");
    const std::size_t n = times.size();
    if (n == 0) return;
    const std::size_t step = std::max<std::size_t>(1, n / 6);
    for (std::size_t i = 0; i < n; i += step)
        text(s, f.px(times[i].get<double>()), y,
             std::to_string(risk[i].get<std::size_t>()),
             "text-anchor=\"middle\" fill=\"" + std::string(color) + "\" font-size=\"10\"");
}

double km_max_time(const nlohmann::json& km) {
    if (km.is_null()) return 0.0;
    const auto& times = km.at("event_times");
    return times.empty() ? 0.0 : times.back().get<double>();
}

}  // namespace

std::string svg_survival_panels(const nlohmann::json& audit) {
    const int W = 920, H = 480;
    std::string s;
    open_doc(s, W, H);
    text(s, W / 2.0, 24, "Survival by predicted responder class",
         "text-anchor=\"middle\" font-size=\"15\"");

    const char* class_keys[2] = {"good", "bad"};
    const char* titles[2] = {"Good responders", "Bad responders"};
    for (int panel = 0; panel < 2; ++panel) {
        const auto& cls = audit.at("classes").at(class_keys[panel]);
        const auto& km_t = cls.at("km_treated");
        const auto& km_c = cls.at("km_control");

        double tmax = std::max({km_max_time(km_t), km_max_time(km_c), 1.0}) * 1.05;
        Frame f{70.0 + panel * 440.0, 50, 360, H - 190.0, 0.0, tmax, 0.0, 1.0};

        std::vector<double> xticks;
        const double xstep = tmax > 60 ? 24.0 : (tmax > 20 ? 12.0 : (tmax > 5 ? 4.0 : 1.0));
        for (double t = 0; t <= tmax; t += xstep) xticks.push_back(t);
        axes(s, f, xticks, {0.0, 0.5, 1.0}, "months", panel == 0 ? "S(t)" : "");
        text(s, f.x0 + f.w / 2, f.y0 - 8, titles[panel], "text-anchor=\"middle\" font-size=\"13\"");

        km_step_path(s, f, km_t, kTreated);
        km_step_path(s, f, km_c, kControl);

        const double ry = f.y0 + f.h + 52;
        text(s, f.x0 - 8, ry - 14, "at risk:", "text-anchor=\"end\" font-size=\"10\" fill=\"#555\"");
        at_risk_row(s, f, km_t, ry, kTreated, "treated");
        at_risk_row(s, f, km_c, ry + 14, kControl, "control");

        if (!cls.at("log_rank").is_null()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "log-rank p = %.4g",
                          cls.at("log_rank").at("p_value").get<double>());
            text(s, f.x0 + f.w - 4, f.y0 + 16, buf, "text-anchor=\"end\" fill=\"#333\"");
        } else {
            text(s, f.x0 + f.w - 4, f.y0 + 16, "comparison skipped",
                 "text-anchor=\"end\" fill=\"#999\"");
        }
    }

    text(s, 70, H - 16, "treated", "fill=\"" + std::string(kTreated) + "\"");
    text(s, 130, H - 16, "control", "fill=\"" + std::string(kControl) + "\"");
    s += "</svg>\n";
    return s;
}

}  // namespace pcitk
