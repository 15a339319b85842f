#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/experiment.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

// Header fields shared by every CSV row: schema version then config hash.
std::string prefix(const ExperimentResult& r) {
    return std::to_string(kCsvSchemaVersion) + "," + r.config.config_hash;
}

// Labels are user text; quote anything that would break the row.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Fixed two-decimal coordinates keep the SVG byte-stable.
std::string coord(double v) {
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
    return std::string(buf.data(), end);
}

std::string describe_noise(const SeriesConfig& s) {
    if (s.scenario == Scenario::DetectorDecoy) return "voa_dark:" + format_double(s.voa.lambda);
    return s.noise.describe();
}

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_rates_csv(std::ostream& out, const ExperimentResult& result) {
    out << "schema_version,config_hash,seed,series,scenario,mode,n_total,noise,distance_km,rate,delta1_s,e1_s,"
           "q0,qd,qs,ed,es,a0p_lower,a1p_lower,a2p_lower,a0_upper,a1_upper,a2_upper,eps_signal,eps_decoy,"
           "confidence,flags\n";
    for (const SeriesResult& s : result.series) {
        const std::string head = prefix(result) + "," + std::to_string(s.seed) + "," + csv_field(s.config.label) +
                                 "," + to_string(s.config.scenario) + "," + to_string(s.config.mode) + "," +
                                 std::to_string(s.config.n_total) + "," + describe_noise(s.config);
        for (const KeyRateReport& r : s.rows) {
            const SourceBounds& b = r.bounds;
            out << head << ',' << format_double(r.distance_km) << ',' << format_double(r.rate) << ','
                << format_double(r.delta1_s) << ',' << format_double(r.e1_s) << ',' << format_double(r.obs.q0) << ','
                << format_double(r.obs.qd) << ',' << format_double(r.obs.qs) << ',' << format_double(r.obs.ed) << ','
                << format_double(r.obs.es) << ',' << format_double(b.a0p_lower) << ',' << format_double(b.a1p_lower)
                << ',' << format_double(b.a2p_lower) << ',' << format_double(b.a0_upper) << ','
                << format_double(b.a1_upper) << ',' << format_double(b.a2_upper) << ','
                << format_double(s.resolution.eps_signal) << ',' << format_double(s.resolution.eps_decoy) << ','
                << format_double(b.confidence) << ',' << describe_flags(r.flags) << '\n';
        }
    }
}

void write_histograms_csv(std::ostream& out, const ExperimentResult& result) {
    out << "schema_version,config_hash,series,class,n_pulses,k0,k1,k2,k_more,seed\n";
    for (const SeriesResult& s : result.series) {
        for (const auto& [cls, h] : s.histograms) {
            const bool sampled = s.config.mode == RunMode::MonteCarlo;
            out << prefix(result) << ',' << csv_field(s.config.label) << ',' << to_string(cls) << ',' << h.n_pulses
                << ',' << h.k0 << ',' << h.k1 << ',' << h.k2 << ',' << h.k_more << ','
                << (sampled ? std::to_string(s.seed) : std::string("none")) << '\n';
        }
    }
}

void write_sweeps_csv(std::ostream& out, const ExperimentResult& result) {
    out << "schema_version,config_hash,series,class,eta,clicks,no_clicks,n_pulses,seed\n";
    for (const SeriesResult& s : result.series) {
        for (const auto& [cls, rec] : s.sweeps) {
            for (std::size_t i = 0; i < 3; ++i) {
                out << prefix(result) << ',' << csv_field(s.config.label) << ',' << to_string(cls) << ','
                    << format_double(rec.sweep.etas[i]) << ',' << rec.clicks[i] << ',' << rec.no_clicks[i] << ','
                    << rec.sweep.n_pulses_per_setting << ',' << rec.seed << '\n';
            }
        }
    }
}

void write_pna_csv(std::ostream& out, const ExperimentResult& result) {
    out << "schema_version,config_hash,seed,series,distance_km,rate,delta,eps,m_min,m_max,q1s_lower,e1s_upper,"
           "qs_upper,qd_lower,qes_upper,correction,flags\n";
    for (const SeriesResult& s : result.series) {
        for (const PnaReport& p : s.pna_rows) {
            out << prefix(result) << ',' << s.seed << ',' << csv_field(s.config.label) << ','
                << format_double(p.base.distance_km) << ',' << format_double(p.base.rate) << ','
                << format_double(p.stats.delta) << ',' << format_double(p.stats.eps) << ',' << p.window.m_min << ','
                << p.window.m_max << ',' << format_double(p.q1s_lower) << ',' << format_double(p.e1s_upper) << ','
                << format_double(p.qs_upper) << ',' << format_double(p.qd_lower) << ',' << format_double(p.qes_upper)
                << ',' << format_double(p.correction) << ',' << describe_flags(p.base.flags) << '\n';
        }
    }
}

std::vector<PlotSeries> plot_series(const ExperimentResult& result) {
    std::vector<PlotSeries> out;
    for (const SeriesResult& s : result.series) {
        PlotSeries p{s.config.label, {}};
        for (const KeyRateReport& r : s.rows) p.points.emplace_back(r.distance_km, r.rate);
        out.push_back(std::move(p));
    }
    return out;
}

std::string emit_figure(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    if (series.empty()) throw InvalidParameter("emit_figure: no series to plot");

    constexpr double kWidth = 800.0, kHeight = 500.0;
    constexpr double kLeft = 80.0, kRight = 200.0, kTop = 40.0, kBottom = 60.0;
    constexpr int kMaxDecades = 12;

    double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            if (y > 0.0 && std::isfinite(y)) {
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0;
        x_max = 1.0;
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    int dec_hi = 0, dec_lo = -1;
    if (std::isfinite(y_min)) {
        dec_hi = static_cast<int>(std::ceil(std::log10(y_max)));
        dec_lo = static_cast<int>(std::floor(std::log10(y_min)));
        if (dec_lo == dec_hi) --dec_lo;
        dec_lo = std::max(dec_lo, dec_hi - kMaxDecades);
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    const auto py = [&](double y) {
        const double t = (std::log10(y) - dec_lo) / static_cast<double>(dec_hi - dec_lo);
        return kTop + (1.0 - std::clamp(t, 0.0, 1.0)) * plot_h;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(kWidth) << "\" height=\"" << coord(kHeight)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(spec.title) << "</text>\n";
    svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\"" << coord(plot_w)
        << "\" height=\"" << coord(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int d = dec_lo; d <= dec_hi; ++d) {
        const double y = py(std::pow(10.0, d));
        svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(y) << "\" x2=\"" << coord(kLeft + plot_w)
            << "\" y2=\"" << coord(y) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(y + 4) << "\" text-anchor=\"end\">1e" << d
            << "</text>\n";
    }
    constexpr int kXTicks = 5;
    for (int i = 0; i <= kXTicks; ++i) {
        const double x = x_min + (x_max - x_min) * i / kXTicks;
        svg << "<text x=\"" << coord(px(x)) << "\" y=\"" << coord(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\">" << format_double(std::round(x * 100.0) / 100.0) << "</text>\n";
    }
    svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << coord(kHeight - 16)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
    svg << "<text transform=\"translate(18," << coord(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(spec.y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % kPalette.size()];
        bool any = false;
        std::string run;
        const auto flush = [&] {
            if (!run.empty()) {
                svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << run
                    << "\"/>\n";
            }
            run.clear();
        };
        for (const auto& [x, y] : series[i].points) {
            // A non-positive rate ends the current segment.
            if (!(y > 0.0) || !std::isfinite(y)) {
                flush();
                continue;
            }
            any = true;
            if (!run.empty()) run += ' ';
            run += coord(px(x)) + "," + coord(py(y));
        }
        flush();

        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        const double lx = kLeft + plot_w + 12.0;
        svg << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(lx + 20) << "\" y2=\""
            << coord(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << coord(lx + 26) << "\" y=\"" << coord(ly + 4) << "\">" << xml_escape(series[i].label)
            << (any ? "" : " (no key)") << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir,
                                                 bool with_svg) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    const std::string& name = result.config.name;
    const auto emit = [&](const std::string& file, const auto& writer) {
        const auto path = out_dir / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        writer(out);
        if (!out) throw Error("write failed for " + path.string());
        written.push_back(path);
    };

    emit(name + "_rates.csv", [&](std::ostream& o) { write_rates_csv(o, result); });
    const bool has_hist = std::any_of(result.series.begin(), result.series.end(),
                                      [](const SeriesResult& s) { return !s.histograms.empty(); });
    const bool has_sweeps = std::any_of(result.series.begin(), result.series.end(),
                                        [](const SeriesResult& s) { return !s.sweeps.empty(); });
    const bool has_pna = std::any_of(result.series.begin(), result.series.end(),
                                     [](const SeriesResult& s) { return !s.pna_rows.empty(); });
    if (has_hist) emit(name + "_histograms.csv", [&](std::ostream& o) { write_histograms_csv(o, result); });
    if (has_sweeps) emit(name + "_sweeps.csv", [&](std::ostream& o) { write_sweeps_csv(o, result); });
    if (has_pna) emit(name + "_pna.csv", [&](std::ostream& o) { write_pna_csv(o, result); });
    if (with_svg) {
        const PlotSpec spec{result.config.title};
        emit(name + ".svg", [&](std::ostream& o) { o << emit_figure(plot_series(result), spec); });
    }
    return written;
}

}  // namespace pnrqkd
