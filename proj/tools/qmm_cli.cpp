// Command-line front end: run cards, parameter sweeps, closed-form oracle
// queries and re-classification of existing CSV output.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qmm/errors.hpp"
#include "qmm/io.hpp"
#include "qmm/oracle.hpp"

namespace fs = std::filesystem;
using namespace qmm;

namespace {

std::vector<double> parse_value_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw ValidationError("empty value list");
    return out;
}

// name=v1,v2,... axis syntax for sweeps
SweepAxis parse_axis(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("axis must be name=v1,v2,...");
    return {s.substr(0, eq), parse_value_list(s.substr(eq + 1))};
}

// Scalar history presets for the oracle subcommands:
//   const:c | lin:m,b | sin:A,w[,phase] | poly:c0,c1,c2,...
ScalarHistoryFn parse_history(const std::string& s) {
    const auto colon = s.find(':');
    const std::string kind = colon == std::string::npos ? s : s.substr(0, colon);
    std::vector<double> p;
    if (colon != std::string::npos) p = parse_value_list(s.substr(colon + 1));
    if (kind == "const") {
        if (p.size() != 1) throw ValidationError("const history needs one value");
        return [c = p[0]](double) { return c; };
    }
    if (kind == "lin") {
        if (p.size() != 2) throw ValidationError("lin history needs slope,intercept");
        return [m = p[0], b = p[1]](double t) { return m * t + b; };
    }
    if (kind == "sin") {
        if (p.size() < 2 || p.size() > 3) throw ValidationError("sin history needs A,w[,phase]");
        const double ph = p.size() == 3 ? p[2] : 0.0;
        return [A = p[0], w = p[1], ph](double t) { return A * std::sin(w * t + ph); };
    }
    if (kind == "poly") {
        if (p.empty()) throw ValidationError("poly history needs coefficients");
        return [p](double t) {
            double v = 0, tp = 1;
            for (double c : p) {
                v += c * tp;
                tp *= t;
            }
            return v;
        };
    }
    throw ValidationError("unknown history preset: " + kind);
}

std::string out_path(const std::string& dir, const std::string& stem, const std::string& suffix) {
    fs::create_directories(dir);
    return (fs::path(dir) / (stem + suffix)).string();
}

void apply_overrides(RunCard& card, const std::string& dt_in_a, const std::string& engine,
                     const std::string& representation) {
    if (!dt_in_a.empty()) card.config.dt_in_a = std::stod(dt_in_a);
    if (engine == "rk4_delay") card.config.engine = EngineKind::rk4_delay;
    else if (engine == "method_of_steps") card.config.engine = EngineKind::method_of_steps;
    else if (!engine.empty()) throw ValidationError("unknown engine: " + engine);
    if (representation == "cartesian") card.config.representation = Representation::cartesian;
    else if (representation == "polar") card.config.representation = Representation::polar;
    else if (!representation.empty()) throw ValidationError("unknown representation: " + representation);
    card.config.validate();
}

int cmd_run(const std::string& card_path, const std::string& out_dir, const std::string& dt_in_a,
            const std::string& engine, const std::string& representation,
            const std::string& windows) {
    RunCard card = load_run_card(card_path);
    apply_overrides(card, dt_in_a, engine, representation);
    if (!windows.empty()) {
        card.output.plot_windows.clear();
        std::stringstream ss(windows);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ValidationError("window must be lo:hi");
            card.output.plot_windows.emplace_back(std::stod(item.substr(0, colon)),
                                                  std::stod(item.substr(colon + 1)));
        }
    }

    const std::string stem = fs::path(card_path).stem().string();
    const Trajectory traj = simulate(card.config);
    const ObservableSeries csv_series = extract_series(traj, card.output.decimate);
    write_series_csv(out_path(out_dir, stem, ".csv"), csv_series);

    const ObservableSeries cls_series = extract_series(traj, card.classify_decimate);
    const PhaseReport report = analyze_series(cls_series, card.classifier);
    write_phase_report(out_path(out_dir, stem, ".report.txt"), card, report, traj.max_step_drift);

    int plot_index = 0;
    for (const auto& [lo, hi] : card.output.plot_windows) {
        std::ostringstream cap;
        cap << stem << "  model=" << to_string(card.config.model) << "  a=" << card.config.a;
        write_svg_plot(out_path(out_dir, stem, "." + std::to_string(plot_index++) + ".svg"),
                       csv_series, lo, hi, cap.str());
    }

    std::cout << "final_label " << to_string(report.decision.final_label) << "\n";
    if (report.transition)
        std::cout << "transition " << to_string(report.transition->from_label) << "->"
                  << to_string(report.transition->to_label) << " t="
                  << report.transition->t_transition / card.config.a << "a\n";
    std::cout << "max_step_norm_drift " << traj.max_step_drift << " at t="
              << traj.t_max_drift / card.config.a << "a\n";
    return 0;
}

int cmd_sweep(const std::string& card_path, const std::string& axis1, const std::string& axis2,
              const std::string& out_dir, int jobs) {
    SweepSpec spec;
    spec.base = load_run_card(card_path);
    spec.axis1 = parse_axis(axis1);
    if (!axis2.empty()) spec.axis2 = parse_axis(axis2);
    const auto rows = run_sweep(spec, jobs);
    write_phase_map_csv(out_path(out_dir, "phase_map", ".csv"), spec, rows);
    for (const auto& row : rows) {
        std::cout << spec.axis1.name << "=" << row.v1;
        if (row.v2) std::cout << " " << spec.axis2->name << "=" << *row.v2;
        std::cout << " -> " << (row.failed ? "failed" : to_string(row.label)) << "\n";
    }
    if (!spec.axis2) {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!rows[i].failed && !rows[i - 1].failed && rows[i].label != rows[i - 1].label)
                std::cout << "label change bracketed in [" << rows[i - 1].v1 << ", " << rows[i].v1
                          << "]\n";
    }
    return 0;
}

int cmd_classify(const std::string& csv_path, double a, double window_in_a, double stride_in_a,
                 double burn_in_frac) {
    ObservableSeries series = read_series_csv(csv_path, a);
    ClassifierConfig cfg;
    if (window_in_a > 0) cfg.window_in_a = window_in_a;
    if (stride_in_a > 0) cfg.stride_in_a = stride_in_a;
    if (burn_in_frac >= 0) cfg.burn_in_frac = burn_in_frac;
    const PhaseReport rep = analyze_series(series, cfg);
    for (std::size_t i = 0; i < rep.features.size(); ++i)
        std::cout << "window " << i << " t=" << rep.features[i].t_start << " label "
                  << to_string(rep.decision.per_window[i]) << "\n";
    std::cout << "final_label " << to_string(rep.decision.final_label) << "\n";
    if (rep.transition)
        std::cout << "transition " << to_string(rep.transition->from_label) << "->"
                  << to_string(rep.transition->to_label) << " t=" << rep.transition->t_transition
                  << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-qubit memory-made unitary evolution toolkit"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "simulate a run card and emit CSV/report/SVG");
    std::string card_path, out_dir = "out", dt_in_a, engine, representation, windows;
    run->add_option("--card", card_path, "run card path")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--dt-in-a", dt_in_a, "override step size in units of a");
    run->add_option("--engine", engine, "rk4_delay | method_of_steps");
    run->add_option("--representation", representation, "cartesian | polar");
    run->add_option("--windows", windows, "plot windows lo:hi[,lo:hi...] in units of a");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "classify a grid of couplings");
    std::string sweep_card, axis1, axis2, sweep_out = "out";
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    sweep->add_option("--card", sweep_card, "base run card")->required();
    sweep->add_option("--axis", axis1, "name=v1,v2,... first axis")->required();
    sweep->add_option("--axis2", axis2, "optional second axis");
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--jobs", jobs, "concurrent rows");

    // classify
    auto* classify = app.add_subcommand("classify", "re-classify an existing series CSV");
    std::string csv_path;
    double cls_a = 1.0, cls_window = -1, cls_stride = -1, cls_burn = -1;
    classify->add_option("--csv", csv_path, "series CSV path")->required();
    classify->add_option("--a", cls_a, "memory distance of the run")->required();
    classify->add_option("--window-in-a", cls_window, "window length in units of a");
    classify->add_option("--stride-in-a", cls_stride, "window stride in units of a");
    classify->add_option("--burn-in-frac", cls_burn, "burn-in fraction");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed-form checks");
    oracle->require_subcommand(1);
    double lam = 0, mu_hat = 0, a_par = 1, alpha = 0, t_end_in_a = 30;
    double theta0 = 0, theta_b = 0, dtheta_b = 0, ddtheta_b = 0;
    double c1 = 1, c2 = 0, lre = 0, bz = 0;
    std::string history = "const:1";

    auto* o_alpha = oracle->add_subcommand("alpha", "slope roots of the theta-orbit");
    o_alpha->add_option("--lambda-im", lam)->required();
    o_alpha->add_option("--a", a_par)->required();

    auto* o_thr = oracle->add_subcommand("thresholds", "memory-distance thresholds");
    o_thr->add_option("--lambda-im", lam)->required();
    o_thr->add_option("--mu-hat", mu_hat);

    auto* o_theta = oracle->add_subcommand("theta-orbit", "scalar delay dynamics + engine residual");
    o_theta->add_option("--lambda-im", lam)->required();
    o_theta->add_option("--a", a_par)->required();
    o_theta->add_option("--t-end-in-a", t_end_in_a);
    o_theta->add_option("--history", history, "const:c | lin:m,b | sin:A,w[,p] | poly:c0,c1,...");

    auto* o_exc = oracle->add_subcommand("exciton", "fluctuation mode around the slope solution");
    o_exc->add_option("--lambda-im", lam)->required();
    o_exc->add_option("--a", a_par)->required();
    o_exc->add_option("--alpha", alpha, "slope root (largest root when omitted)");
    o_exc->add_option("--t-end-in-a", t_end_in_a);
    o_exc->add_option("--history", history);

    auto* o_gamma = oracle->add_subcommand("gamma", "characteristic roots of the mode equation");
    o_gamma->add_option("--lambda", lam)->required();
    o_gamma->add_option("--a", a_par)->required();
    o_gamma->add_option("--alpha", alpha)->required();

    auto* o_inf = oracle->add_subcommand("infancy", "early-time polynomial coefficients");
    o_inf->add_option("--theta0", theta0)->required();
    o_inf->add_option("--theta-b", theta_b)->required();
    o_inf->add_option("--dtheta-b", dtheta_b)->required();
    o_inf->add_option("--ddtheta-b", ddtheta_b)->required();

    auto* o_hyb = oracle->add_subcommand("hybrid-series", "near-Markovian polynomial solution");
    o_hyb->add_option("--c1", c1)->required();
    o_hyb->add_option("--c2", c2);
    o_hyb->add_option("--lambda-re", lre)->required();
    o_hyb->add_option("--lambda-im", lam)->required();
    o_hyb->add_option("--b-z", bz)->required();
    o_hyb->add_option("--a", a_par, "when given, also prints the engine residual over [a,100a]");

    auto* o_phi = oracle->add_subcommand("phi-orbit", "closed-form category of the phi-orbit");
    o_phi->add_option("--lambda-im", lam)->required();
    o_phi->add_option("--mu-hat", mu_hat)->required();
    o_phi->add_option("--theta0", theta0)->required();
    o_phi->add_option("--a", a_par)->required();

    try {
        app.parse(argc, argv);

        if (*run) return cmd_run(card_path, out_dir, dt_in_a, engine, representation, windows);
        if (*sweep) return cmd_sweep(sweep_card, axis1, axis2, sweep_out, jobs);
        if (*classify) return cmd_classify(csv_path, cls_a, cls_window, cls_stride, cls_burn);

        if (*o_alpha) {
            for (double r : alpha_roots(lam, a_par).roots) std::cout << r << "\n";
            return 0;
        }
        if (*o_thr) {
            std::cout << "theta_orbit_a_star " << theta_orbit_threshold(lam) << "\n";
            std::cout << "phi_orbit_a_star " << phi_orbit_threshold(lam, mu_hat) << "\n";
            return 0;
        }
        if (*o_theta) {
            const auto fn = parse_history(history);
            const auto oracle_series = solve_theta_orbit(fn, lam, a_par, t_end_in_a * a_par);
            std::cout << "t_end " << oracle_series.t.back() << " theta_end "
                      << oracle_series.x.back() << " dtheta_end " << oracle_series.xdot.back()
                      << "\n";
            // engine residual: the full simulator restricted to theta-orbit
            // inputs, on the same grid as the oracle
            RunConfig cfg;
            cfg.model = Model::qmm22;
            cfg.couplings.lambda_im = lam;
            cfg.a = a_par;
            cfg.t_end_in_a = t_end_in_a;
            cfg.dt_in_a = 1.0 / 400;
            const Trajectory traj = simulate_with_custom_history(
                cfg, [&](double t) { return BlochAngles{fn(t), 0.0}; });
            double max_err = 0;
            for (std::size_t i = 0; i < traj.size(); i += 10) {
                const double ft = traj.time_at(i) / oracle_series.dt;
                const auto j = static_cast<std::size_t>(std::llround(ft));
                if (j >= oracle_series.size()) break;
                const Vec3 ref = angles_to_vector({oracle_series.x[j], 0.0});
                max_err = std::max(max_err, norm(ref - traj.r[i]));
            }
            std::cout << "engine_vs_oracle_max_state_error " << max_err << "\n";
            return 0;
        }
        if (*o_exc) {
            if (o_exc->count("--alpha") == 0) {
                const auto roots = alpha_roots(lam, a_par).roots;
                alpha = roots.back();
            }
            const auto fn = parse_history(history);
            const auto series = solve_exciton_mode(fn, lam, a_par, alpha, t_end_in_a * a_par);
            double tail_max = 0;
            for (std::size_t i = series.size() * 4 / 5; i < series.size(); ++i)
                tail_max = std::max(tail_max, std::abs(series.xdot[i]));
            std::cout << "alpha " << alpha << " mode_end " << series.x.back()
                      << " max_tail_rate " << tail_max << "\n";
            return 0;
        }
        if (*o_gamma) {
            for (double r : characteristic_gamma_roots(lam, a_par, alpha)) std::cout << r << "\n";
            return 0;
        }
        if (*o_inf) {
            const auto th = infancy_coefficients(theta0, theta_b, dtheta_b, ddtheta_b);
            std::cout << th[0] << " " << th[1] << " " << th[2] << "\n";
            return 0;
        }
        if (*o_hyb) {
            const NearMarkovSeries s = hybrid_near_markovian(c1, c2, lre, lam, bz);
            for (int n = 0; n <= 2; ++n) {
                std::cout << "theta[" << n << "]";
                for (double coef : s.theta_poly[n]) std::cout << " " << coef;
                std::cout << "\nphi[" << n << "]";
                for (double coef : s.phi_poly[n]) std::cout << " " << coef;
                std::cout << "\n";
            }
            if (o_hyb->count("--a") > 0) {
                RunConfig cfg;
                cfg.model = Model::hybrid22;
                cfg.couplings.lambda_re = lre;
                cfg.couplings.lambda_im = lam;
                cfg.couplings.b_ext = {0, 0, bz};
                cfg.a = a_par;
                cfg.t_end_in_a = 100;
                const Trajectory traj = simulate_with_custom_history(cfg, [&](double t) {
                    return BlochAngles{s.theta_at(a_par, t), s.phi_at(a_par, t)};
                });
                double max_err = 0;
                for (std::size_t i = traj.pool_end; i < traj.size(); ++i) {
                    const double t = traj.time_at(i);
                    max_err = std::max(max_err, std::abs(traj.theta[i] - s.theta_at(a_par, t)));
                    max_err = std::max(max_err, std::abs(traj.phi[i] - s.phi_at(a_par, t)));
                }
                std::cout << "engine_vs_series_max_angle_error " << max_err << "\n";
            }
            return 0;
        }
        if (*o_phi) {
            const PhiOrbitResult res = phi_orbit_classify(lam, mu_hat, theta0, a_par);
            std::cout << "category " << phi_orbit_category_name(res.category) << "\n";
            if (res.category == PhiOrbitCategory::GenericTriplet)
                std::cout << "slope " << res.slope << " consistent_a " << res.consistent_a << "\n";
            if (res.category == PhiOrbitCategory::DiscreteMuFamily)
                std::cout << "slope " << res.slope << " k " << res.family_k << "\n";
            if (res.category == PhiOrbitCategory::LambdaOnlyOrbit) {
                std::cout << "slope_roots";
                for (double r : res.slope_roots) std::cout << " " << r;
                std::cout << "\n";
            }
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientData& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
