#include "metaiot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace metaiot::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle")
{
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) +
           "</text>\n";
}

// Blue to red through white.
std::string colour(double t)
{
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = static_cast<int>(59 + u * (255 - 59));
        g = static_cast<int>(76 + u * (255 - 76));
        b = static_cast<int>(192 + u * (255 - 192));
    } else {
        const double u = (t - 0.5) / 0.5;
        r = static_cast<int>(255 + u * (180 - 255));
        g = static_cast<int>(255 + u * (4 - 255));
        b = static_cast<int>(255 + u * (38 - 255));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace

std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, s.y[k]);
            y1 = std::max(y1, s.y[k]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1 - (y - y0) / (y1 - y0)) * ph; };

    std::string s = header(kWidth, kHeight);
    s += text(kWidth / 2, 22, title);
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        s += text(px(xv), kTop + ph + 16, num(xv));
        s += text(kLeft - 6, py(yv) + 4, num(yv), "end");
    }
    s += text(kLeft + pw / 2, kHeight - 10, x_label);
    s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(y_label) + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& ser = series[i];
        const char* c = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
            if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
            pts += num(px(ser.x[k])) + "," + num(py(ser.y[k])) + " ";
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
        const double ly = kTop + 14 + 16 * static_cast<double>(i);
        s += "<line x1=\"" + num(kLeft + pw + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(kLeft + pw + 28) +
             "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>\n";
        s += text(kLeft + pw + 32, ly, ser.label, "start");
    }
    return s + "</svg>\n";
}

std::string heatmap(const Eigen::MatrixXd& values, double lo, double hi, const std::string& title)
{
    const double cell = std::max(8.0, std::min(40.0, 400.0 / static_cast<double>(std::max<Eigen::Index>(
                                                          1, std::max(values.rows(), values.cols())))));
    const double w = kLeft + cell * static_cast<double>(values.cols()) + 110;
    const double h = kTop + cell * static_cast<double>(values.rows()) + 30;
    const double span = hi > lo ? hi - lo : 1.0;

    std::string s = header(w, h);
    s += text(w / 2, 22, title);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            const double y = kTop + cell * static_cast<double>(values.rows() - 1 - r);
            s += "<rect x=\"" + num(kLeft + cell * static_cast<double>(c)) + "\" y=\"" + num(y) + "\" width=\"" +
                 num(cell) + "\" height=\"" + num(cell) + "\" fill=\"" + colour((values(r, c) - lo) / span) +
                 "\"/>\n";
        }
    }
    const double bx = kLeft + cell * static_cast<double>(values.cols()) + 20;
    const double bh = cell * static_cast<double>(values.rows());
    for (int k = 0; k < 20; ++k) {
        s += "<rect x=\"" + num(bx) + "\" y=\"" + num(kTop + bh * (19 - k) / 20.0) + "\" width=\"14\" height=\"" +
             num(bh / 20.0 + 0.5) + "\" fill=\"" + colour((k + 0.5) / 20.0) + "\"/>\n";
    }
    s += text(bx + 18, kTop + 10, num(hi), "start");
    s += text(bx + 18, kTop + bh, num(lo), "start");
    return s + "</svg>\n";
}

} // namespace metaiot::svg
