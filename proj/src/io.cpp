#include "qmm/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "qmm/errors.hpp"

namespace qmm {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

void write_series_csv(const std::string& path, const ObservableSeries& series) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    const bool second = series.has_second_memory();
    out << "t,theta,phi,psi_up,re_psi_down,im_psi_down,w2_at";
    if (second) out << ",w2_bt,w2_ab";
    out << "\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << fmt(series.t[i]) << ',' << fmt(series.theta[i]) << ',' << fmt(series.phi[i]) << ','
            << fmt(series.psi_up[i]) << ',' << fmt(series.re_psi_down[i]) << ','
            << fmt(series.im_psi_down[i]) << ',' << fmt(series.w2_at[i]);
        if (second) out << ',' << fmt(series.w2_bt[i]) << ',' << fmt(series.w2_ab[i]);
        out << "\n";
    }
    if (!out) throw ValidationError("write failed: " + path);
}

ObservableSeries read_series_csv(const std::string& path, double a) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    const bool second = line.find("w2_bt") != std::string::npos;
    if (line.rfind("t,theta,phi,psi_up", 0) != 0)
        throw ValidationError(path + ": unrecognized CSV header");

    ObservableSeries s;
    s.a = a;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        const std::size_t expected = second ? 9 : 7;
        if (row.size() != expected)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bad column count");
        s.t.push_back(row[0]);
        s.theta.push_back(row[1]);
        s.phi.push_back(row[2]);
        s.psi_up.push_back(row[3]);
        s.re_psi_down.push_back(row[4]);
        s.im_psi_down.push_back(row[5]);
        s.w2_at.push_back(row[6]);
        if (second) {
            s.w2_bt.push_back(row[7]);
            s.w2_ab.push_back(row[8]);
        }
    }
    if (s.t.size() < 2) throw ValidationError(path + ": too few rows");
    s.dt = s.t[1] - s.t[0];
    return s;
}

void write_phase_report(const std::string& path, const RunCard& card, const PhaseReport& report,
                        double max_step_drift) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << "card: " << card.name << "\n";
    out << "model: " << to_string(card.config.model) << "\n";
    out << "a: " << fmt(card.config.a) << "\n";
    out << "max_step_norm_drift: " << fmt(max_step_drift) << "\n";
    out << "final_label: " << to_string(report.decision.final_label) << "\n";
    if (report.transition) {
        out << "transition: " << to_string(report.transition->from_label) << "->"
            << to_string(report.transition->to_label) << " at t=" << fmt(report.transition->t_transition)
            << " (" << fmt(report.transition->t_transition / card.config.a) << " a)\n";
    } else {
        out << "transition: none\n";
    }
    out << "windows:\n";
    for (std::size_t i = 0; i < report.features.size(); ++i) {
        const auto& w = report.features[i];
        out << "  " << w.index << " t=[" << fmt(w.t_start) << "," << fmt(w.t_stop)
            << "] label=" << to_string(report.decision.per_window[i]) << " mean_w2=" << fmt(w.mean_w2)
            << " std_w2=" << fmt(w.std_w2);
        if (w.frozen) out << " frozen";
        if (w.has_period) out << " period=" << fmt(w.dominant_period) << " acf=" << fmt(w.w2_acf_peak);
        if (w.bistability)
            out << " bistable(dwell=" << fmt(w.bistability->mean_dwell)
                << ",transit=" << fmt(w.bistability->mean_transit) << ",on="
                << (w.bistability->source == BistabilitySource::fidelity ? "w2" : "component")
                << ")";
        out << "\n";
    }
    if (!out) throw ValidationError("write failed: " + path);
}

namespace {

// min-max decimation per pixel column keeps oscillation envelopes visible
void emit_polyline(std::ofstream& out, const std::vector<double>& t, const std::vector<double>& y,
                   std::size_t lo, std::size_t hi, double x0, double x1, double y0, double y1,
                   double ymin, double ymax, const char* color) {
    const int px_cols = 860;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.8\" points=\"";
    const double t_lo = t[lo], t_hi = t[hi - 1];
    const double yspan = ymax - ymin > 1e-300 ? ymax - ymin : 1.0;
    auto xmap = [&](double tt) { return x0 + (x1 - x0) * (tt - t_lo) / (t_hi - t_lo); };
    auto ymap = [&](double vv) { return y1 - (y1 - y0) * (vv - ymin) / yspan; };
    const std::size_t n = hi - lo;
    if (n <= static_cast<std::size_t>(px_cols) * 2) {
        for (std::size_t i = lo; i < hi; ++i)
            out << fmt(xmap(t[i])) << ',' << fmt(ymap(y[i])) << ' ';
    } else {
        for (int c = 0; c < px_cols; ++c) {
            const std::size_t i0 = lo + n * c / px_cols;
            const std::size_t i1 = lo + n * (c + 1) / px_cols;
            double mn = y[i0], mx = y[i0];
            for (std::size_t i = i0; i < i1; ++i) {
                mn = std::min(mn, y[i]);
                mx = std::max(mx, y[i]);
            }
            const double xc = xmap(t[i0]);
            out << fmt(xc) << ',' << fmt(ymap(mx)) << ' ' << fmt(xc) << ',' << fmt(ymap(mn)) << ' ';
        }
    }
    out << "\"/>\n";
}

} // namespace

void write_svg_plot(const std::string& path, const ObservableSeries& series, double win_lo_in_a,
                    double win_hi_in_a, const std::string& caption) {
    const double t_lo = win_lo_in_a * series.a;
    const double t_hi = win_hi_in_a * series.a;
    auto lo_it = std::lower_bound(series.t.begin(), series.t.end(), t_lo);
    auto hi_it = std::upper_bound(series.t.begin(), series.t.end(), t_hi);
    const auto lo = static_cast<std::size_t>(lo_it - series.t.begin());
    const auto hi = static_cast<std::size_t>(hi_it - series.t.begin());
    if (hi < lo + 2) throw ValidationError("write_svg_plot: window holds fewer than two samples");

    const struct {
        const char* name;
        const std::vector<double>* y;
        const char* color;
    } panels[] = {{"w2_at", &series.w2_at, "#1f77b4"},
                  {"psi_up", &series.psi_up, "#2ca02c"},
                  {"re_psi_down", &series.re_psi_down, "#d62728"}};

    const double width = 920, panel_h = 200, pad = 40;
    const double height = pad + 3 * (panel_h + 30) + 20;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"20\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << caption
        << "</text>\n";

    double top = pad;
    for (const auto& p : panels) {
        double ymin = (*p.y)[lo], ymax = ymin;
        for (std::size_t i = lo; i < hi; ++i) {
            ymin = std::min(ymin, (*p.y)[i]);
            ymax = std::max(ymax, (*p.y)[i]);
        }
        if (ymax - ymin < 1e-12) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        const double x0 = 50, x1 = width - 10, y0 = top, y1 = top + panel_h;
        out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\""
            << panel_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
        out << "<text x=\"" << x0 << "\" y=\"" << y0 - 6
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << p.name << "  ["
            << fmt(win_lo_in_a) << "a, " << fmt(win_hi_in_a) << "a]  min=" << fmt(ymin)
            << " max=" << fmt(ymax) << "</text>\n";
        emit_polyline(out, series.t, *p.y, lo, hi, x0, x1, y0 + 4, y1 - 4, ymin, ymax, p.color);
        top += panel_h + 30;
    }
    out << "</svg>\n";
    if (!out) throw ValidationError("write failed: " + path);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
    if (spec.axis1.values.empty() || (spec.axis2 && spec.axis2->values.empty()))
        throw ValidationError("sweep: every axis needs at least 1 value");
    std::vector<std::pair<double, std::optional<double>>> grid;
    if (spec.axis2) {
        for (double v1 : spec.axis1.values)
            for (double v2 : spec.axis2->values) grid.emplace_back(v1, v2);
    } else {
        for (double v1 : spec.axis1.values) grid.emplace_back(v1, std::nullopt);
    }

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            SweepRow& row = rows[i];
            row.v1 = grid[i].first;
            row.v2 = grid[i].second;
            try {
                RunConfig cfg = spec.base.config;
                apply_parameter(cfg, spec.axis1.name, row.v1);
                if (row.v2) apply_parameter(cfg, spec.axis2->name, *row.v2);
                const Trajectory traj = simulate(cfg);
                const ObservableSeries series = extract_series(traj, spec.base.classify_decimate);
                const PhaseReport rep = analyze_series(series, spec.base.classifier);
                row.label = rep.decision.final_label;
                row.transition = rep.transition;
                double mean = 0;
                for (const auto& w : rep.features) mean += w.mean_w2;
                row.mean_w2 = mean / double(rep.features.size());
                double sd = 0;
                for (const auto& w : rep.features) sd += w.std_w2;
                row.std_w2 = sd / double(rep.features.size());
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return rows;
}

void write_phase_map_csv(const std::string& path, const SweepSpec& spec,
                         const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << spec.axis1.name;
    if (spec.axis2) out << ',' << spec.axis2->name;
    out << ",label,mean_w2,std_w2,transition,status\n";
    for (const auto& row : rows) {
        out << fmt(row.v1);
        if (row.v2) out << ',' << fmt(*row.v2);
        out << ',' << to_string(row.label) << ',' << fmt(row.mean_w2) << ',' << fmt(row.std_w2)
            << ',';
        if (row.transition)
            out << to_string(row.transition->from_label) << "->"
                << to_string(row.transition->to_label) << "@" << fmt(row.transition->t_transition);
        else
            out << "none";
        out << ',' << (row.failed ? "failed: " + row.error : std::string("ok")) << "\n";
    }
    if (!out) throw ValidationError("write failed: " + path);
}

} // namespace qmm
