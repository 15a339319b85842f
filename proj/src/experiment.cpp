#include "pnrqkd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

using nlohmann::json;

namespace {

// RNG streams under a series seed, one per measured class.
enum Stream : std::uint64_t {
    kStreamSignalHistogram = 0,
    kStreamDecoyHistogram = 1,
    kStreamSignalSweep = 2,
    kStreamDecoySweep = 3,
    kStreamPnaMonitor = 4,
};

const std::map<std::string, Scenario, std::less<>> kScenarioNames{
    {"trusted_reference", Scenario::TrustedReference}, {"pnr_noiseless", Scenario::PnrNoiseless},
    {"pnr_poisson_dark", Scenario::PnrPoissonDark},    {"pnr_general_noise", Scenario::PnrGeneralNoise},
    {"pna_scheme", Scenario::PnaScheme},               {"detector_decoy", Scenario::DetectorDecoy},
};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path + ": " + message);
}

// Typed access to one JSON object with field-path error messages and
// rejection of unknown keys.
class Fields {
  public:
    Fields(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string at(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    [[nodiscard]] bool has(const char* key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    [[nodiscard]] const json& raw(const char* key) {
        seen_.insert(key);
        return node_.at(key);
    }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }

    std::uint64_t count(const char* key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) fail(at(key), "must be >= 0");
        if (v.is_number_float()) {
            // Allows 1e9-style literals as long as they are exact integers.
            const double d = v.get<double>();
            if (!(d >= 0.0) || d != std::floor(d) || d >= 18446744073709551616.0) {
                fail(at(key), "expected a non-negative integer, got " + format_double(d));
            }
            return static_cast<std::uint64_t>(d);
        }
        fail(at(key), "expected a non-negative integer");
    }

    std::string text(const char* key, std::string fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }

    void reject_unknown() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.contains(key)) fail(at(key), "unknown field");
        }
    }

  private:
    const json& node_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

template <class Enum>
Enum choose(Fields& f, const char* key, Enum fallback, const std::map<std::string, Enum, std::less<>>& names) {
    if (!f.has(key)) return fallback;
    const std::string value = f.text(key, "");
    const auto it = names.find(value);
    if (it == names.end()) {
        std::string options;
        for (const auto& [name, e] : names) options += (options.empty() ? "" : ", ") + name;
        fail(f.at(key), "unknown value \"" + value + "\" (expected one of: " + options + ")");
    }
    return it->second;
}

std::vector<double> parse_distances(const json& node, const std::string& path) {
    if (node.is_array()) {
        std::vector<double> out;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (!node[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(node[i].get<double>());
        }
        return out;
    }
    Fields f(node, path);
    const double start = f.number("start", 0.0);
    const double stop = f.number("stop", 150.0);
    const double step = f.number("step", 2.0);
    f.reject_unknown();
    if (!(step > 0.0)) fail(path + ".step", "must be > 0");
    if (!(stop >= start)) fail(path + ".stop", "must be >= start");
    return distance_grid(start, stop, step);
}

NoiseModel parse_noise(const json& node, const std::string& path) {
    Fields f(node, path);
    const std::string type = f.text("type", "none");
    NoiseModel noise;
    if (type == "none") {
        noise = NoiseModel{};
    } else if (type == "poisson") {
        const double lambda = f.number("lambda", 0.0);
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(f.at("lambda"), "must be finite and >= 0");
        noise = NoiseModel{PoissonDark{lambda}};
    } else if (type == "general") {
        if (!f.has("probs")) fail(f.at("probs"), "required for general noise");
        const json& probs = f.raw("probs");
        if (!probs.is_array()) fail(f.at("probs"), "expected an array of probabilities");
        std::vector<double> p;
        for (const auto& x : probs) {
            if (!x.is_number()) fail(f.at("probs"), "expected numbers");
            p.push_back(x.get<double>());
        }
        if (p.size() == 1) p.push_back(0.0);
        try {
            noise = NoiseModel{GeneralNoise{PhotonNumberDistribution(std::move(p))}};
        } catch (const InvalidParameter& e) {
            fail(f.at("probs"), e.what());
        }
    } else {
        fail(f.at("type"), "unknown noise type \"" + type + "\" (expected none, poisson or general)");
    }
    f.reject_unknown();
    return noise;
}

PnaSettings parse_pna(const json& node, const std::string& path) {
    Fields f(node, path);
    PnaSettings s;
    if (f.has("eps")) s.eps = f.number("eps", 0.0);
    s.rel_half_width = f.number("rel_half_width", s.rel_half_width);
    if (f.has("m_min") || f.has("m_max")) {
        if (!f.has("m_min") || !f.has("m_max")) fail(path, "m_min and m_max must be given together");
        s.window = UntaggedWindow{f.count("m_min", 0), f.count("m_max", 0)};
    }
    f.reject_unknown();
    return s;
}

VoaSettings parse_voa(const json& node, const std::string& path) {
    Fields f(node, path);
    VoaSettings s;
    if (f.has("etas")) {
        const json& etas = f.raw("etas");
        if (!etas.is_array() || etas.size() != 3) fail(f.at("etas"), "expected three transmittances [1, eta1, eta2]");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!etas[i].is_number()) fail(f.at("etas"), "expected numbers");
            s.etas[i] = etas[i].get<double>();
        }
    }
    s.lambda = f.number("lambda", s.lambda);
    s.dark_model = choose(f, "dark_model", s.dark_model,
                          {{"bernoulli", DarkCountModel::Bernoulli}, {"poisson", DarkCountModel::Poisson}});
    f.reject_unknown();
    return s;
}

SeriesConfig parse_series(const json& node, const std::string& path) {
    Fields f(node, path);
    SeriesConfig s;
    s.label = f.text("label", "");
    s.scenario = choose(f, "scenario", s.scenario, kScenarioNames);
    s.n_total = f.count("n_total", 0);
    s.mode = choose(f, "mode", s.mode,
                    {{"monte_carlo", RunMode::MonteCarlo}, {"deterministic", RunMode::Deterministic}});
    s.asymptotic = f.flag("asymptotic", false);
    if (f.has("seed")) s.seed = f.count("seed", 0);
    if (f.has("noise")) s.noise = parse_noise(f.raw("noise"), f.at("noise"));
    if (f.has("lambda")) {
        // Shorthand for {"noise": {"type": "poisson", "lambda": ...}}.
        const double lambda = f.number("lambda", 0.0);
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(f.at("lambda"), "must be finite and >= 0");
        s.noise = NoiseModel{PoissonDark{lambda}};
    }
    if (f.has("pna")) s.pna = parse_pna(f.raw("pna"), f.at("pna"));
    if (f.has("voa")) s.voa = parse_voa(f.raw("voa"), f.at("voa"));
    f.reject_unknown();
    if (s.label.empty()) s.label = to_string(s.scenario);
    return s;
}

void check_probability(const std::string& path, double v, bool open_low = false) {
    if (!(v >= 0.0 && v <= 1.0) || (open_low && v == 0.0)) fail(path, "must lie in " + std::string(open_low ? "(0, 1]" : "[0, 1]"));
}

}  // namespace

const char* to_string(Scenario s) {
    for (const auto& [name, value] : kScenarioNames) {
        if (value == s) return name.c_str();
    }
    return "unknown";
}

const char* to_string(RunMode m) { return m == RunMode::MonteCarlo ? "monte_carlo" : "deterministic"; }

std::vector<double> distance_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start) || !std::isfinite(stop)) {
        throw InvalidParameter("distance grid needs step > 0 and stop >= start");
    }
    std::vector<double> out;
    // Integer stepping avoids accumulated drift in the grid values.
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

void ExperimentConfig::validate() const {
    if (name.empty()) fail("name", "required");
    if (name.find_first_of("/\\ ") != std::string::npos) fail("name", "must not contain path separators or spaces");
    if (!(confidence > 0.0 && confidence < 1.0)) fail("confidence", "must lie in (0, 1)");
    if (distances.empty()) fail("distance", "grid is empty");
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (!(distances[i] >= 0.0) || !std::isfinite(distances[i])) {
            fail("distance[" + std::to_string(i) + "]", "must be finite and >= 0");
        }
        if (i > 0 && !(distances[i] > distances[i - 1])) {
            fail("distance[" + std::to_string(i) + "]", "grid must be strictly increasing");
        }
    }
    if (!(mu_decoy > 0.0 && mu_decoy < mu_signal) || !std::isfinite(mu_signal)) {
        fail("source.mu_decoy", "need 0 < mu_decoy < mu_signal");
    }
    if (!(source.apn_p1 > 0.0) || !std::isfinite(source.apn_p1)) fail("source.apn_p1", "must be finite and > 0");
    check_probability("optics.eta_s", optics.eta_s, true);
    check_probability("optics.eta_d", optics.eta_d, true);
    check_probability("optics.eta_bs", optics.eta_bs, true);
    check_probability("optics.eta_det", optics.eta_det, true);
    if (source_mode == SourceMode::Optical) {
        try {
            optics.validate();
        } catch (const CalibrationError& e) {
            fail("optics.eta_det", e.what());
        }
    }
    try {
        gys.validate();
    } catch (const InvalidParameter& e) {
        fail("gys", e.what());
    }
    try {
        PulseBudget{0, frac_signal, frac_decoy, frac_vacuum}.validate();
    } catch (const InvalidParameter& e) {
        fail("budget", e.what());
    }
    if (series.empty()) fail("series", "at least one series is required");

    std::set<std::string> labels;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const SeriesConfig& s = series[i];
        const std::string at = "series[" + std::to_string(i) + "]";
        if (!labels.insert(s.label).second) fail(at + ".label", "duplicate label \"" + s.label + "\"");
        const bool needs_n = s.scenario != Scenario::TrustedReference && !s.asymptotic;
        if (needs_n && s.n_total < 3) fail(at + ".n_total", "required (>= 3) for finite-size scenarios");
        if (s.n_total > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            fail(at + ".n_total", "exceeds the 63-bit pulse counter range");
        }
        if (s.mode == RunMode::MonteCarlo && needs_n && s.scenario != Scenario::PnaScheme) {
            const PulseSplit split = split_budget({s.n_total, frac_signal, frac_decoy, frac_vacuum});
            if (split.n_signal == 0 || split.n_decoy == 0) fail(at + ".n_total", "too small for the pulse budget");
        }
        const auto& kind = s.noise.kind();
        switch (s.scenario) {
            case Scenario::PnrNoiseless:
                if (!std::holds_alternative<NoNoise>(kind)) fail(at + ".noise", "pnr_noiseless takes no noise model");
                break;
            case Scenario::PnrPoissonDark:
                if (!std::holds_alternative<PoissonDark>(kind)) {
                    fail(at + ".lambda", "pnr_poisson_dark needs a Poisson noise model (lambda)");
                }
                break;
            case Scenario::PnrGeneralNoise:
                if (!std::holds_alternative<GeneralNoise>(kind)) {
                    fail(at + ".noise", "pnr_general_noise needs {\"type\": \"general\", \"probs\": [...]}");
                }
                if (!(std::get<GeneralNoise>(kind).pnd[0] > 0.0)) fail(at + ".noise.probs", "N(y=0) must be > 0");
                break;
            case Scenario::PnaScheme:
                if (s.pna.eps && !(*s.pna.eps >= 0.0)) fail(at + ".pna.eps", "must be >= 0");
                if (!(s.pna.rel_half_width >= 0.0 && s.pna.rel_half_width < 1.0)) {
                    fail(at + ".pna.rel_half_width", "must lie in [0, 1)");
                }
                if (s.pna.window && s.pna.window->m_min > s.pna.window->m_max) {
                    fail(at + ".pna.m_min", "must be <= m_max");
                }
                break;
            case Scenario::DetectorDecoy: {
                VoaSweep probe;
                probe.etas = s.voa.etas;
                probe.lambda = s.voa.lambda;
                probe.dark_model = s.voa.dark_model;
                try {
                    probe.validate();
                } catch (const Error& e) {
                    fail(at + ".voa", e.what());
                }
                break;
            }
            case Scenario::TrustedReference:
                break;
        }
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }

    ExperimentConfig c;
    Fields f(doc, "");
    c.name = f.text("name", "");
    c.title = f.text("title", c.name);
    c.seed = f.count("seed", c.seed);
    c.confidence = f.number("confidence", c.confidence);
    c.distances = f.has("distance") ? parse_distances(f.raw("distance"), "distance") : distance_grid(0.0, 150.0, 2.0);

    if (f.has("source")) {
        Fields s(f.raw("source"), "source");
        c.mu_signal = s.number("mu_signal", c.mu_signal);
        c.mu_decoy = s.number("mu_decoy", c.mu_decoy);
        c.source.apn_p1 = s.number("apn_p1", c.source.apn_p1);
        c.source_mode = choose(s, "mode", c.source_mode, {{"exact", SourceMode::Exact}, {"optical", SourceMode::Optical}});
        s.reject_unknown();
    }
    if (f.has("optics")) {
        Fields o(f.raw("optics"), "optics");
        c.optics.eta_s = o.number("eta_s", c.optics.eta_s);
        c.optics.eta_d = o.number("eta_d", c.optics.eta_d);
        c.optics.eta_bs = o.number("eta_bs", c.optics.eta_bs);
        c.optics.eta_det = o.number("eta_det", c.optics.eta_det);
        o.reject_unknown();
    }
    if (f.has("gys")) {
        Fields g(f.raw("gys"), "gys");
        c.gys.eta_bob = g.number("eta_bob", c.gys.eta_bob);
        c.gys.alpha = g.number("alpha", c.gys.alpha);
        c.gys.y0 = g.number("y0", c.gys.y0);
        c.gys.e_det = g.number("e_det", c.gys.e_det);
        c.gys.e0 = g.number("e0", c.gys.e0);
        c.gain_model = choose(g, "gain_model", c.gain_model,
                              {{"additive", GainModel::Additive}, {"complement", GainModel::Complement}});
        g.reject_unknown();
    }
    if (f.has("budget")) {
        Fields b(f.raw("budget"), "budget");
        c.frac_signal = b.number("signal", c.frac_signal);
        c.frac_decoy = b.number("decoy", c.frac_decoy);
        c.frac_vacuum = b.number("vacuum", c.frac_vacuum);
        b.reject_unknown();
    }
    if (f.has("series")) {
        const json& list = f.raw("series");
        if (!list.is_array()) fail("series", "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            c.series.push_back(parse_series(list[i], "series[" + std::to_string(i) + "]"));
        }
    }
    f.reject_unknown();
    c.config_hash = hex64(fnv1a64(doc.dump()));
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

namespace {

double p4_mean(const ExperimentConfig& c, SourceClass cls) {
    if (c.source_mode == SourceMode::Exact) return cls == SourceClass::Signal ? c.mu_signal : c.mu_decoy;
    return mean_at_p4(SourceSpec{c.source}, c.optics, cls);
}

PhotonNumberDistribution p3_pnd(const ExperimentConfig& c, SourceClass cls) {
    if (c.source_mode == SourceMode::Exact) return poisson_pnd(p4_mean(c, cls));
    return pnd_at_p3(SourceSpec{c.source}, c.optics, cls);
}

SourceBounds exact_bounds(const PhotonNumberDistribution& s, const PhotonNumberDistribution& d) {
    SourceBounds b;
    b.a0p_lower = s[0];
    b.a1p_lower = s[1];
    b.a2p_lower = s[2];
    b.a0_upper = d[0];
    b.a1_upper = d[1];
    b.a2_upper = d[2];
    b.confidence = 1.0;
    return b;
}

void run_pnr(const ExperimentConfig& c, SeriesResult& r) {
    const SeriesConfig& s = r.config;
    const auto sig = p3_pnd(c, SourceClass::Signal);
    const auto dec = p3_pnd(c, SourceClass::Decoy);
    if (s.asymptotic) {
        r.bounds = exact_bounds(sig, dec);
        return;
    }
    CountHistogram hs;
    CountHistogram hd;
    if (s.mode == RunMode::MonteCarlo) {
        hs = sample_histogram(sig, s.noise, r.split.n_signal, derive_seed(r.seed, kStreamSignalHistogram));
        hd = sample_histogram(dec, s.noise, r.split.n_decoy, derive_seed(r.seed, kStreamDecoyHistogram));
    } else {
        hs = expected_histogram(sig, s.noise, r.split.n_signal);
        hd = expected_histogram(dec, s.noise, r.split.n_decoy);
    }
    r.histograms = {{SourceClass::Signal, hs}, {SourceClass::Decoy, hd}};
    r.resolution = resolution_from_confidence(r.split.n_signal, r.split.n_decoy, c.confidence);
    r.bounds = estimate_bounds(hs, hd, r.resolution, s.noise);
}

void run_detector_decoy(const ExperimentConfig& c, SeriesResult& r) {
    const SeriesConfig& s = r.config;
    const auto sig = p3_pnd(c, SourceClass::Signal);
    const auto dec = p3_pnd(c, SourceClass::Decoy);
    const auto& v = s.voa;
    std::uint64_t ns = 0;
    std::uint64_t nd = 0;
    if (!s.asymptotic) {
        ns = r.split.n_signal / 3;
        nd = r.split.n_decoy / 3;
        if (ns == 0 || nd == 0) throw InvalidParameter("n_total too small for three attenuator settings per class");
        r.resolution = resolution_from_confidence(ns, nd, c.confidence);
    }
    SweepRecord rs;
    SweepRecord rd;
    if (s.asymptotic || s.mode == RunMode::Deterministic) {
        rs = expected_sweep(sig, v.etas, v.lambda, v.dark_model, ns);
        rd = expected_sweep(dec, v.etas, v.lambda, v.dark_model, nd);
    } else {
        rs = simulate_sweep(sig, v.etas, v.lambda, v.dark_model, ns, derive_seed(r.seed, kStreamSignalSweep));
        rd = simulate_sweep(dec, v.etas, v.lambda, v.dark_model, nd, derive_seed(r.seed, kStreamDecoySweep));
    }
    r.sweeps = {{SourceClass::Signal, rs}, {SourceClass::Decoy, rd}};
    r.bounds = sweep_to_source_bounds(rs.sweep, rd.sweep, r.resolution);
}

void run_pna(const ExperimentConfig& c, SeriesResult& r) {
    const SeriesConfig& s = r.config;
    // Photon number monitored ahead of the signal attenuator.
    const double monitored_mean = c.source_mode == SourceMode::Exact
                                      ? c.mu_signal / c.optics.eta_s
                                      : c.source.apn_p1 * (1.0 - c.optics.eta_bs) * c.optics.eta_det;
    const UntaggedWindow window = s.pna.window.value_or(UntaggedWindow::around(monitored_mean, s.pna.rel_half_width));
    const double outside = poisson_outside_window(monitored_mean, window);

    UntaggedStats stats;
    if (s.asymptotic) {
        stats.delta = outside;
        stats.eps = 0.0;
        stats.confidence = 1.0;
    } else {
        if (s.mode == RunMode::MonteCarlo) {
            Engine rng(derive_seed(r.seed, kStreamPnaMonitor));
            stats.delta = static_cast<double>(sample_binomial(s.n_total, outside, rng)) /
                          static_cast<double>(s.n_total);
        } else {
            stats.delta = outside;
        }
        stats.eps = pna_resolution(s.n_total, c.confidence);
        stats.confidence = pna_confidence(s.n_total, stats.eps);
    }
    if (s.pna.eps) {
        stats.eps = *s.pna.eps;
        stats.confidence = s.n_total > 0 ? pna_confidence(s.n_total, stats.eps) : 1.0;
    }

    for (const double d : c.distances) {
        const auto obs = simulate_observables(r.mu_signal_p4, r.mu_decoy_p4, c.gys, d, c.gain_model);
        r.pna_rows.push_back(pna_key_rate(obs, stats, window, c.optics.eta_s, c.optics.eta_d));
        r.rows.push_back(r.pna_rows.back().base);
    }
}

}  // namespace

SeriesResult run_series(const ExperimentConfig& c, const SeriesConfig& s) {
    SeriesResult r;
    r.config = s;
    r.seed = s.seed.value_or(c.seed);
    r.mu_signal_p4 = p4_mean(c, SourceClass::Signal);
    r.mu_decoy_p4 = p4_mean(c, SourceClass::Decoy);
    if (s.n_total > 0) r.split = split_budget({s.n_total, c.frac_signal, c.frac_decoy, c.frac_vacuum});

    switch (s.scenario) {
        case Scenario::TrustedReference:
            r.bounds = asymptotic_bounds(r.mu_signal_p4, r.mu_decoy_p4);
            for (const double d : c.distances) {
                const auto obs = simulate_observables(r.mu_signal_p4, r.mu_decoy_p4, c.gys, d, c.gain_model);
                r.rows.push_back(trusted_rate(r.mu_signal_p4, r.mu_decoy_p4, obs));
            }
            return r;
        case Scenario::PnaScheme:
            run_pna(c, r);
            return r;
        case Scenario::DetectorDecoy:
            run_detector_decoy(c, r);
            break;
        default:
            run_pnr(c, r);
            break;
    }
    for (const double d : c.distances) {
        r.rows.push_back(
            untrusted_rate(r.bounds, simulate_observables(r.mu_signal_p4, r.mu_decoy_p4, c.gys, d, c.gain_model)));
    }
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::future<SeriesResult>> pending;
    pending.reserve(config.series.size());
    for (const SeriesConfig& s : config.series) {
        pending.push_back(std::async(std::launch::async, [&config, &s] { return run_series(config, s); }));
    }
    ExperimentResult result;
    result.config = config;
    for (auto& f : pending) result.series.push_back(f.get());
    return result;
}

}  // namespace pnrqkd
