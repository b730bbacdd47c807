#include "thinopt/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

constexpr double kWidth = 720.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 24.0, kTop = 40.0, kBottom = 56.0;

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct Range {
    double lo{0.0}, hi{1.0};

    double clamp01(double v) const { return (v - lo) / (hi - lo); }
};

Range data_range(std::span<const SvgSeries> series, bool x_axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const SvgSeries& s : series)
        for (const auto& [x, y] : s.points) {
            const double v = x_axis ? x : y;
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(lo <= hi)) throw InputError("chart has no finite data points");
    if (lo == hi) { // degenerate: pad symmetrically
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

// Largest of {1, 2, 5} * 10^k not exceeding roughly range / 4.
double tick_step(const Range& r) {
    const double raw = (r.hi - r.lo) / 4.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {5.0, 2.0, 1.0})
        if (mult * mag <= raw) return mult * mag;
    return mag;
}

std::string tick_label(double v, double step) {
    // Snap values like 0.30000000000000004 back to the tick lattice.
    const double snapped = std::round(v / step) * step;
    const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step))));
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(std::min(decimals, 12));
    out << snapped;
    return out.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

class Chart {
  public:
    Chart(const std::string& title, const std::string& x_label, const std::string& y_label,
          std::span<const SvgSeries> series)
        : series_(series), xr_(data_range(series, true)), yr_(data_range(series, false)) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
             << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
             << "\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out_ << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
             << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";
        axes(x_label, y_label);
    }

    double px(double x) const { return kLeft + xr_.clamp01(x) * (kWidth - kLeft - kRight); }
    double py(double y) const {
        return kHeight - kBottom - yr_.clamp01(y) * (kHeight - kTop - kBottom);
    }

    void polylines() {
        for (const SvgSeries& s : series_) {
            if (s.points.empty()) continue;
            out_ << "<polyline fill=\"none\" stroke=\"" << escape(s.color)
                 << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points)
                out_ << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
            out_ << "\"/>\n";
        }
    }

    void dots() {
        for (const SvgSeries& s : series_)
            for (const auto& [x, y] : s.points)
                out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
                     << "\" r=\"3\" fill=\"" << escape(s.color) << "\"/>\n";
    }

    void legend() {
        double y = kTop + 8.0;
        for (const SvgSeries& s : series_) {
            if (s.label.empty()) continue;
            const double x = kWidth - kRight - 150.0;
            out_ << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" "
                 << "fill=\"" << escape(s.color) << "\"/>\n";
            out_ << "<text x=\"" << x + 18 << "\" y=\"" << y + 1
                 << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label)
                 << "</text>\n";
            y += 18.0;
        }
    }

    void save(const std::filesystem::path& path) {
        out_ << "</svg>\n";
        std::ofstream file(path);
        if (!file) throw InputError("cannot open " + path.string() + " for writing");
        file << out_.str();
        if (!file) throw InputError("failed writing " + path.string());
    }

  private:
    void axes(const std::string& x_label, const std::string& y_label) {
        const double x0 = kLeft, x1 = kWidth - kRight;
        const double y0 = kHeight - kBottom, y1 = kTop;
        out_ << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
             << "\" stroke=\"black\"/>\n";
        out_ << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
             << "\" stroke=\"black\"/>\n";

        const double xs = tick_step(xr_);
        for (double v = std::ceil(xr_.lo / xs) * xs; v <= xr_.hi + 1e-9 * xs; v += xs) {
            const double x = px(v);
            out_ << "<line x1=\"" << fmt(x) << "\" y1=\"" << y0 << "\" x2=\"" << fmt(x)
                 << "\" y2=\"" << y0 + 5 << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << fmt(x) << "\" y=\"" << y0 + 20
                 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                 << tick_label(v, xs) << "</text>\n";
        }
        const double ys = tick_step(yr_);
        for (double v = std::ceil(yr_.lo / ys) * ys; v <= yr_.hi + 1e-9 * ys; v += ys) {
            const double y = py(v);
            out_ << "<line x1=\"" << x0 - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0
                 << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << x0 - 8 << "\" y=\"" << fmt(y + 4)
                 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
                 << tick_label(v, ys) << "</text>\n";
        }

        out_ << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
             << escape(x_label) << "</text>\n";
        out_ << "<text x=\"18\" y=\"" << (y0 + y1) / 2
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
             << "transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">" << escape(y_label)
             << "</text>\n";
    }

    std::span<const SvgSeries> series_;
    Range xr_, yr_;
    std::ostringstream out_;
};

} // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::span<const SvgSeries> series) {
    Chart chart(title, x_label, y_label, series);
    chart.polylines();
    chart.legend();
    chart.save(path);
}

void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> groups) {
    Chart chart(title, x_label, y_label, groups);
    chart.dots();
    chart.legend();
    chart.save(path);
}

} // namespace thinopt
