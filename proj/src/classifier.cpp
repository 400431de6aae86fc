#include "qmm/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>

#include "qmm/errors.hpp"

namespace qmm {

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::P1_FixedPoint: return "P1";
        case PhaseLabel::P2_RegularOscConstTPF: return "P2";
        case PhaseLabel::P3_Unstructured: return "P3";
        case PhaseLabel::P4_Structured: return "P4";
        case PhaseLabel::P5_BiStateMetastable: return "P5";
        case PhaseLabel::Undecided: return "undecided";
    }
    return "?";
}

PhaseLabel phase_label_from_string(const std::string& s) {
    if (s == "P1") return PhaseLabel::P1_FixedPoint;
    if (s == "P2") return PhaseLabel::P2_RegularOscConstTPF;
    if (s == "P3") return PhaseLabel::P3_Unstructured;
    if (s == "P4") return PhaseLabel::P4_Structured;
    if (s == "P5") return PhaseLabel::P5_BiStateMetastable;
    return PhaseLabel::Undecided;
}

namespace {

struct AcfResult {
    bool found = false;
    double period = 0;
    double peak = 0;
};

// Dominant period from the sample autocorrelation: the highest peak past the
// first dip, refined by a parabola through the peak neighbours.
AcfResult dominant_period(std::span<const double> x, double dt_sample) {
    const std::size_t n = x.size();
    AcfResult res;
    if (n < 16) return res;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mean;
    double denom = 0;
    for (double v : c) denom += v * v;
    if (denom < 1e-24 * double(n)) return res;  // constant series

    const std::size_t max_lag = std::min(n / 2, std::size_t{4096});
    std::vector<double> acf(max_lag + 1, 0.0);
    acf[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double s = 0;
        for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
        // unbiased normalization so a strictly periodic signal peaks near 1
        acf[lag] = (s / double(n - lag)) / (denom / double(n));
    }

    // skip the trivial decay away from lag 0
    std::size_t start = 1;
    while (start < max_lag && acf[start] > acf[start + 1]) ++start;
    std::size_t top = 0;
    for (std::size_t lag = start; lag <= max_lag; ++lag)
        if (top == 0 || acf[lag] > acf[top]) top = lag;
    if (top == 0 || acf[top] <= 0.05) return res;
    // a periodic signal repeats its peak at every multiple of the period;
    // take the earliest local peak comparable to the strongest one
    std::size_t best = top;
    for (std::size_t lag = start + 1; lag < top; ++lag) {
        if (acf[lag] >= acf[lag - 1] && acf[lag] >= acf[lag + 1] && acf[lag] >= 0.9 * acf[top]) {
            best = lag;
            break;
        }
    }

    double refined = double(best);
    if (best > 0 && best < max_lag) {
        const double y0 = acf[best - 1], y1 = acf[best], y2 = acf[best + 1];
        const double d = y0 - 2 * y1 + y2;
        if (std::abs(d) > 1e-15) refined += 0.5 * (y0 - y2) / d;
    }
    res.found = true;
    res.period = refined * dt_sample;
    res.peak = acf[best];
    return res;
}

// Zigzag count: extrema are confirmed only after the series retraces by more
// than the prominence threshold, so small ripples do not register.
int gapped_extrema(std::span<const double> x, double prominence) {
    if (x.size() < 3 || prominence <= 0) return 0;
    int count = 0;
    int dir = 0;
    double lo = x[0], hi = x[0];
    double ext = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double v = x[i];
        if (dir == 0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (v - lo > prominence) { dir = 1; ext = v; }
            else if (hi - v > prominence) { dir = -1; ext = v; }
        } else if (dir > 0) {
            if (v > ext) {
                ext = v;
            } else if (ext - v > prominence) {  // confirmed maximum
                ++count;
                dir = -1;
                ext = v;
            }
        } else {
            if (v < ext) {
                ext = v;
            } else if (v - ext > prominence) {  // confirmed minimum
                ++count;
                dir = 1;
                ext = v;
            }
        }
    }
    return count;
}

std::optional<Bistability> detect_bistability(std::span<const double> raw, double dt_sample,
                                              const ClassifierConfig& cfg, double a) {
    const std::size_t n = raw.size();
    if (n < 8) return std::nullopt;

    // level switches come with fast full-swing ringing; a short moving
    // average keeps the plateaus and suppresses the rings
    const auto half = static_cast<std::size_t>(std::max(1.0, a / dt_sample));
    std::vector<double> x(n);
    double acc = 0;
    std::size_t wl = 0, wr = 0;  // running window [wl, wr)
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t tl = i > half ? i - half : 0;
        const std::size_t tr = std::min(n, i + half + 1);
        while (wr < tr) acc += raw[wr++];
        while (wl < tl) acc -= raw[wl++];
        x[i] = acc / double(wr - wl);
    }

    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    double lo = *mn_it, hi = *mx_it;
    if (hi - lo < cfg.bist_min_contrast) return std::nullopt;

    // plain 1-d two-means
    for (int iter = 0; iter < 32; ++iter) {
        double slo = 0, shi = 0;
        std::size_t nlo = 0, nhi = 0;
        const double mid = 0.5 * (lo + hi);
        for (double v : x) {
            if (v < mid) { slo += v; ++nlo; } else { shi += v; ++nhi; }
        }
        if (nlo == 0 || nhi == 0) return std::nullopt;
        const double nlo_c = slo / double(nlo), nhi_c = shi / double(nhi);
        if (std::abs(nlo_c - lo) + std::abs(nhi_c - hi) < 1e-12) break;
        lo = nlo_c;
        hi = nhi_c;
    }
    if (hi - lo < cfg.bist_min_contrast) return std::nullopt;

    const double mid = 0.5 * (lo + hi);
    std::size_t occ_lo = 0, occ_hi = 0;
    for (double v : x) (v < mid ? occ_lo : occ_hi)++;
    if (double(occ_lo) < cfg.bist_occupancy * double(n) ||
        double(occ_hi) < cfg.bist_occupancy * double(n))
        return std::nullopt;

    // band membership with a 25% guard band around each level
    const double guard = 0.25 * (hi - lo);
    auto level_of = [&](double v) -> int {
        if (v <= lo + guard) return -1;
        if (v >= hi - guard) return +1;
        return 0;
    };

    double dwell_sum = 0, transit_sum = 0;
    int dwell_count = 0, transit_count = 0;
    std::size_t run_start = 0;
    int run_level = level_of(x[0]);
    int last_level = run_level;
    for (std::size_t i = 1; i <= n; ++i) {
        const int lv = i < n ? level_of(x[i]) : 2;  // sentinel closes the last run
        if (lv == run_level) continue;
        const double len = double(i - run_start) * dt_sample;
        const bool interior = run_start > 0 && i < n;  // skip clipped edge runs
        if (run_level != 0) {
            if (interior) {
                dwell_sum += len;
                ++dwell_count;
            }
            last_level = run_level;
        } else if (interior && last_level != 0) {
            transit_sum += len;
            ++transit_count;
        }
        run_start = i;
        run_level = lv;
    }
    if (dwell_count < 1) return std::nullopt;
    const double mean_dwell = dwell_sum / double(dwell_count);
    const double mean_transit = transit_count > 0 ? transit_sum / double(transit_count) : 0.0;
    if (mean_dwell < cfg.bist_dwell_in_a * a) return std::nullopt;
    // transitions are sharp relative to the dwells; long dwells may take
    // proportionally longer switching rings
    if (mean_transit > std::max(cfg.bist_transit_in_a * a, 0.2 * mean_dwell)) return std::nullopt;

    Bistability b;
    b.level_lo = lo;
    b.level_hi = hi;
    b.mean_dwell = mean_dwell;
    b.mean_transit = mean_transit;
    return b;
}

} // namespace

std::vector<WindowFeatures> window_features(const ObservableSeries& series,
                                            const ClassifierConfig& cfg) {
    if (series.size() < 2) throw InsufficientData("window_features: empty series");
    if (cfg.window_in_a < 10.0)
        throw ValidationError("window_features: window length must cover at least 10 delays");
    const double t0 = series.t.front();
    const double t_end = series.t.back();
    const double burn_in = t0 + cfg.burn_in_frac * (t_end - t0);
    const double window = cfg.window_in_a * series.a;
    const double stride = cfg.stride_in_a * series.a;
    if (t_end - burn_in < window)
        throw InsufficientData("window_features: series shorter than burn-in plus one window");

    const auto per_window = static_cast<std::size_t>(window / series.dt);
    const auto per_stride = std::max<std::size_t>(1, static_cast<std::size_t>(stride / series.dt));
    auto first = static_cast<std::size_t>(std::ceil((burn_in - t0) / series.dt));

    std::vector<WindowFeatures> out;
    int index = 0;
    for (std::size_t s = first; s + per_window <= series.size(); s += per_stride) {
        WindowFeatures w;
        w.index = index++;
        w.t_start = series.t[s];
        w.t_stop = series.t[s + per_window - 1];

        std::span<const double> w2(series.w2_at.data() + s, per_window);
        double mean = std::accumulate(w2.begin(), w2.end(), 0.0) / double(per_window);
        double var = 0;
        for (double v : w2) var += (v - mean) * (v - mean);
        w.mean_w2 = mean;
        w.std_w2 = std::sqrt(var / double(per_window));
        w.frozen = w.std_w2 < cfg.frozen_std;

        const AcfResult acf = dominant_period(w2, series.dt);
        w.has_period = acf.found;
        w.dominant_period = acf.period;
        w.w2_acf_peak = acf.peak;
        if (acf.found && acf.period > 0) {
            const auto [mn, mx] = std::minmax_element(w2.begin(), w2.end());
            const int n_ext = gapped_extrema(w2, 0.05 * (*mx - *mn));
            w.extrema_per_period = double(n_ext) * acf.period / window;
        }

        std::span<const double> re(series.re_psi_down.data() + s, per_window);
        std::span<const double> up(series.psi_up.data() + s, per_window);
        const auto [re_mn, re_mx] = std::minmax_element(re.begin(), re.end());
        const auto [up_mn, up_mx] = std::minmax_element(up.begin(), up.end());
        w.comp_amplitude = 0.5 * std::max(*re_mx - *re_mn, *up_mx - *up_mn);
        const AcfResult cacf = dominant_period(re, series.dt);
        w.comp_has_period = cacf.found;
        w.comp_period = cacf.period;
        w.comp_acf_peak = cacf.peak;

        // Metastable switching shows up either as a two-level fidelity or as
        // two held wavefunction levels whose swaps dip the fidelity.
        w.bistability = detect_bistability(w2, series.dt, cfg, series.a);
        if (!w.bistability) {
            std::span<const double> im(series.im_psi_down.data() + s, per_window);
            for (const auto& comp : {up, re, im}) {
                auto b = detect_bistability(comp, series.dt, cfg, series.a);
                if (b) {
                    b->source = BistabilitySource::component;
                    w.bistability = b;
                    break;
                }
            }
        }
        out.push_back(std::move(w));
    }
    if (out.empty()) throw InsufficientData("window_features: no complete window after burn-in");
    return out;
}

PhaseDecision classify_phase(const std::vector<WindowFeatures>& features,
                             const ClassifierConfig& cfg) {
    if (features.size() < 3) throw InsufficientData("classify_phase: needs at least 3 windows");
    PhaseDecision d;
    d.per_window.reserve(features.size());
    for (const auto& w : features) {
        PhaseLabel label;
        if (w.std_w2 < cfg.p1_std && w.mean_w2 > cfg.p1_mean && w.comp_amplitude < cfg.p1_amp) {
            label = PhaseLabel::P1_FixedPoint;
        } else if (w.std_w2 < cfg.p2_std && w.comp_amplitude > cfg.p2_amp && w.comp_has_period &&
                   w.comp_acf_peak > cfg.p2_acf) {
            label = PhaseLabel::P2_RegularOscConstTPF;
        } else if (w.bistability.has_value()) {
            label = PhaseLabel::P5_BiStateMetastable;
        } else if (w.has_period && w.w2_acf_peak > cfg.p4_acf &&
                   w.extrema_per_period >= cfg.p4_extrema) {
            label = PhaseLabel::P4_Structured;
        } else {
            label = PhaseLabel::P3_Unstructured;
        }
        d.per_window.push_back(label);
    }

    const std::size_t tail =
        std::min<std::size_t>(d.per_window.size(), static_cast<std::size_t>(cfg.persist_windows));
    std::map<PhaseLabel, int> votes;
    for (std::size_t i = d.per_window.size() - tail; i < d.per_window.size(); ++i)
        ++votes[d.per_window[i]];
    int best = -1;
    for (std::size_t i = d.per_window.size() - tail; i < d.per_window.size(); ++i) {
        const int v = votes[d.per_window[i]];
        if (v >= best) {  // later labels win ties
            best = v;
            d.final_label = d.per_window[i];
        }
    }
    return d;
}

std::optional<TransitionEvent> detect_transition(const std::vector<PhaseLabel>& labels,
                                                 const std::vector<WindowFeatures>& features,
                                                 const ClassifierConfig& cfg) {
    if (labels.size() != features.size() || labels.empty()) return std::nullopt;
    const PhaseLabel tail_label = labels.back();
    // first window of the closing uniform run
    std::size_t k = labels.size();
    while (k > 0 && labels[k - 1] == tail_label) --k;
    if (k == 0) return std::nullopt;  // no change at all
    if (labels.size() - k < static_cast<std::size_t>(cfg.persist_windows)) return std::nullopt;

    std::map<PhaseLabel, int> votes;
    for (std::size_t i = 0; i < k; ++i) ++votes[labels[i]];
    PhaseLabel from = labels[0];
    int best = 0;
    for (const auto& [label, v] : votes)
        if (v > best) { best = v; from = label; }
    if (from == tail_label) return std::nullopt;
    if (double(best) < 0.5 * double(k)) return std::nullopt;  // no persistent initial phase

    TransitionEvent ev;
    ev.t_transition = features[k].t_start;
    ev.from_label = from;
    ev.to_label = tail_label;
    return ev;
}

PhaseReport analyze_series(const ObservableSeries& series, const ClassifierConfig& cfg) {
    PhaseReport rep;
    rep.features = window_features(series, cfg);
    rep.decision = classify_phase(rep.features, cfg);
    rep.transition = detect_transition(rep.decision.per_window, rep.features, cfg);
    return rep;
}

void apply_parameter(RunConfig& cfg, const std::string& name, double value) {
    if (name == "mu") cfg.couplings.mu = value;
    else if (name == "mu_t") cfg.couplings.mu_t = value;
    else if (name == "mu_hat") cfg.couplings.mu = value - cfg.couplings.lambda_re;
    else if (name == "lambda_re") cfg.couplings.lambda_re = value;
    else if (name == "lambda_im") cfg.couplings.lambda_im = value;
    else if (name == "eta") cfg.couplings.eta = value;
    else if (name == "kappa_re") cfg.couplings.kappa_re = value;
    else if (name == "kappa_im") cfg.couplings.kappa_im = value;
    else if (name == "b_ext_x") cfg.couplings.b_ext.x = value;
    else if (name == "b_ext_y") cfg.couplings.b_ext.y = value;
    else if (name == "b_ext_z") cfg.couplings.b_ext.z = value;
    else if (name == "b_kicker_y") cfg.couplings.b_kicker_y = value;
    else if (name == "a") cfg.a = value;
    else if (name == "r") cfg.r = value;
    else if (name == "theta0") cfg.theta0 = value;
    else if (name == "phi0") cfg.phi0 = value;
    else throw ValidationError("unknown parameter name: " + name);
}

CrossoverResult crossover_scan(const RunConfig& base_cfg, const std::string& coupling_name,
                               const std::vector<double>& values, const ClassifierConfig& ccfg,
                               int decimate) {
    CrossoverResult res;
    for (double v : values) {
        RunConfig cfg = base_cfg;
        apply_parameter(cfg, coupling_name, v);
        const Trajectory traj = simulate(cfg);
        const ObservableSeries series = extract_series(traj, decimate);
        const PhaseReport rep = analyze_series(series, ccfg);
        res.labels.emplace_back(v, rep.decision.final_label);
    }
    for (std::size_t i = 1; i < res.labels.size(); ++i)
        if (res.labels[i].second != res.labels[i - 1].second)
            res.brackets.emplace_back(res.labels[i - 1].first, res.labels[i].first);
    return res;
}

} // namespace qmm
