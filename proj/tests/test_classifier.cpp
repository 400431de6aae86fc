#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qmm/classifier.hpp"
#include "qmm/errors.hpp"

using namespace qmm;

namespace {

// Synthetic observable series on a uniform grid starting at t = a.
ObservableSeries synthetic(double a, double t_end, double dt,
                           const std::function<double(double)>& w2_fn,
                           const std::function<double(double)>& comp_fn) {
    ObservableSeries s;
    s.a = a;
    s.dt = dt;
    for (double t = a; t <= t_end; t += dt) {
        s.t.push_back(t);
        const double c = comp_fn(t);
        const double up = std::clamp(c, -1.0, 1.0);
        s.theta.push_back(2 * std::acos(std::clamp(up, 0.0, 1.0)));
        s.phi.push_back(0.0);
        s.psi_up.push_back(up);
        const double down = std::sqrt(std::max(0.0, 1.0 - up * up));
        s.re_psi_down.push_back(down);
        s.im_psi_down.push_back(0.0);
        s.w2_at.push_back(std::clamp(w2_fn(t), 0.0, 1.0));
    }
    return s;
}

} // namespace

TEST_CASE("pure sine fidelity: the dominant period is recovered within 2%") {
    const double period = 7.3;
    const ObservableSeries s =
        synthetic(1.0, 500.0, 0.05, [&](double t) { return 0.6 + 0.3 * std::sin(2 * kPi * t / period); },
                  [](double) { return 0.5; });
    ClassifierConfig cfg;
    const auto feats = window_features(s, cfg);
    REQUIRE(!feats.empty());
    for (const auto& w : feats) {
        REQUIRE(w.has_period);
        CHECK(std::abs(w.dominant_period - period) / period < 0.02);
        CHECK(w.w2_acf_peak > 0.8);
    }
}

TEST_CASE("constant series: no spread, no period, no bistability; phase 1") {
    const ObservableSeries s = synthetic(1.0, 400.0, 0.05, [](double) { return 1.0; },
                                         [](double) { return 0.7; });
    ClassifierConfig cfg;
    const auto feats = window_features(s, cfg);
    for (const auto& w : feats) {
        CHECK(w.std_w2 == doctest::Approx(0.0));
        CHECK_FALSE(w.has_period);
        CHECK_FALSE(w.bistability.has_value());
    }
    const PhaseDecision d = classify_phase(feats, cfg);
    CHECK(d.final_label == PhaseLabel::P1_FixedPoint);
}

TEST_CASE("square-wave fidelity: bistability with dwell recovered within 10%") {
    const double dwell = 100.0, transit = 2.0, cycle = 2 * (dwell + transit);
    auto wave = [&](double t) {
        const double ph = std::fmod(t, cycle);
        if (ph < dwell) return 0.95;
        if (ph < dwell + transit) return 0.95 - 0.75 * (ph - dwell) / transit;
        if (ph < 2 * dwell + transit) return 0.2;
        return 0.2 + 0.75 * (ph - 2 * dwell - transit) / transit;
    };
    const ObservableSeries s = synthetic(1.0, 3000.0, 0.1, wave, [](double) { return 0.5; });
    ClassifierConfig cfg;
    cfg.window_in_a = 500;
    cfg.stride_in_a = 250;
    const auto feats = window_features(s, cfg);
    int detected = 0;
    for (const auto& w : feats) {
        if (!w.bistability) continue;
        ++detected;
        CHECK(std::abs(w.bistability->mean_dwell - dwell) / dwell < 0.10);
        CHECK(w.bistability->level_hi == doctest::Approx(0.95).epsilon(0.05));
        CHECK(w.bistability->level_lo == doctest::Approx(0.2).epsilon(0.25));
    }
    CHECK(detected == int(feats.size()));
    const PhaseDecision d = classify_phase(feats, cfg);
    CHECK(d.final_label == PhaseLabel::P5_BiStateMetastable);
}

TEST_CASE("frozen fidelity with large regular component oscillation: phase 2") {
    const ObservableSeries s = synthetic(
        1.0, 600.0, 0.05, [](double t) { return 0.9 + 0.002 * std::sin(2 * kPi * t / 4.0); },
        [](double t) { return 0.5 + 0.4 * std::sin(2 * kPi * t / 4.0); });
    ClassifierConfig cfg;
    const PhaseDecision d = classify_phase(window_features(s, cfg), cfg);
    CHECK(d.final_label == PhaseLabel::P2_RegularOscConstTPF);
}

TEST_CASE("structured periodic fidelity with several extrema: phase 4") {
    auto w2 = [](double t) {
        const double x = 2 * kPi * t / 12.0;
        return 0.55 + 0.25 * std::sin(x) + 0.15 * std::sin(3 * x + 0.7);
    };
    const ObservableSeries s = synthetic(1.0, 600.0, 0.05, w2,
                                         [](double t) { return 0.6 * std::sin(t); });
    ClassifierConfig cfg;
    const auto feats = window_features(s, cfg);
    for (const auto& w : feats) {
        REQUIRE(w.has_period);
        CHECK(w.extrema_per_period >= 2.0);
    }
    const PhaseDecision d = classify_phase(feats, cfg);
    CHECK(d.final_label == PhaseLabel::P4_Structured);
}

TEST_CASE("filtered noise in the fidelity: phase 3") {
    std::mt19937 gen(99);
    std::normal_distribution<double> noise(0.0, 0.05);
    double x = 0;
    auto w2 = [&](double) {
        x = 0.95 * x + noise(gen);
        return 0.5 + std::clamp(x, -0.45, 0.45);
    };
    const ObservableSeries s = synthetic(1.0, 600.0, 0.05, w2, [](double t) { return 0.6 * std::sin(0.9 * t); });
    ClassifierConfig cfg;
    const PhaseDecision d = classify_phase(window_features(s, cfg), cfg);
    CHECK(d.final_label == PhaseLabel::P3_Unstructured);
}

TEST_CASE("classifier wants at least three windows") {
    const ObservableSeries s = synthetic(1.0, 90.0, 0.05, [](double) { return 1.0; },
                                         [](double) { return 0.7; });
    ClassifierConfig cfg;
    CHECK_THROWS_AS(classify_phase(window_features(s, cfg), cfg), InsufficientData);
    const ObservableSeries tiny = synthetic(1.0, 20.0, 0.05, [](double) { return 1.0; },
                                            [](double) { return 0.7; });
    CHECK_THROWS_AS(window_features(tiny, cfg), InsufficientData);
}

TEST_CASE("transition detection on a switching series") {
    // unstructured noise turning into a clean constant at t = 1000
    std::mt19937 gen(7);
    std::normal_distribution<double> noise(0.0, 0.05);
    double x = 0;
    auto w2 = [&](double t) {
        if (t < 1000) {
            x = 0.9 * x + noise(gen);
            return 0.5 + std::clamp(x, -0.45, 0.45);
        }
        return 1.0;
    };
    auto comp = [&](double t) { return t < 1000 ? 0.5 + 0.4 * std::sin(1.37 * t) : 0.7; };
    const ObservableSeries s = synthetic(1.0, 4000.0, 0.1, w2, comp);
    ClassifierConfig cfg;
    cfg.burn_in_frac = 0.1;
    const PhaseReport rep = analyze_series(s, cfg);
    REQUIRE(rep.transition.has_value());
    CHECK(rep.transition->from_label == PhaseLabel::P3_Unstructured);
    CHECK(rep.transition->to_label == PhaseLabel::P1_FixedPoint);
    CHECK(rep.transition->t_transition > 900.0);
    CHECK(rep.transition->t_transition < 1150.0);

    // stationary series: no event
    const ObservableSeries flat = synthetic(1.0, 4000.0, 0.1, [](double) { return 1.0; },
                                            [](double) { return 0.7; });
    const PhaseReport rep2 = analyze_series(flat, cfg);
    CHECK_FALSE(rep2.transition.has_value());
}

TEST_CASE("classifier is invariant under whole-window time translation") {
    auto w2 = [](double t) { return 0.6 + 0.3 * std::sin(2 * kPi * t / 9.0); };
    auto comp = [](double t) { return 0.5 + 0.3 * std::sin(2 * kPi * t / 9.0); };
    ClassifierConfig cfg;
    cfg.burn_in_frac = 0.0;
    const ObservableSeries s1 = synthetic(1.0, 451.0, 0.05, w2, comp);
    ObservableSeries s2 = s1;
    const double shift = cfg.window_in_a * s1.a;  // one whole window
    for (auto& t : s2.t) t += shift;
    const PhaseDecision d1 = classify_phase(window_features(s1, cfg), cfg);
    const PhaseDecision d2 = classify_phase(window_features(s2, cfg), cfg);
    CHECK(d1.final_label == d2.final_label);
}

TEST_CASE("parameter setter rejects unknown names") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_parameter(cfg, "bogus", 1.0), ValidationError);
    apply_parameter(cfg, "mu_hat", 3.0);
    CHECK(cfg.couplings.mu_hat_past() == doctest::Approx(3.0));
}

TEST_CASE("degenerate single-value scan gives a single label and no bracket") {
    RunConfig cfg;
    cfg.model = Model::qmm22;
    cfg.couplings.lambda_im = 6.111;
    cfg.couplings.mu = 0.592;
    cfg.couplings.b_kicker_y = 2.75;
    cfg.a = 1.73;
    cfg.theta0 = 1.001;
    cfg.phi0 = 0.089;
    cfg.t_end_in_a = 160;
    ClassifierConfig ccfg;
    ccfg.window_in_a = 30;
    ccfg.stride_in_a = 15;
    const CrossoverResult res = crossover_scan(cfg, "mu_hat", {0.592}, ccfg);
    CHECK(res.labels.size() == 1);
    CHECK(res.brackets.empty());
}

TEST_CASE("windows shorter than ten delays are rejected") {
    const ObservableSeries s = synthetic(1.0, 400.0, 0.05, [](double) { return 1.0; },
                                         [](double) { return 0.7; });
    ClassifierConfig cfg;
    cfg.window_in_a = 5.0;
    CHECK_THROWS_AS(window_features(s, cfg), ValidationError);
}

TEST_CASE("a pinned fidelity is marked frozen") {
    const ObservableSeries s = synthetic(1.0, 400.0, 0.05, [](double) { return 0.82; },
                                         [](double t) { return 0.5 + 0.4 * std::sin(2 * kPi * t / 4.0); });
    ClassifierConfig cfg;
    const auto feats = window_features(s, cfg);
    for (const auto& w : feats) CHECK(w.frozen);
    // fully-frozen regular oscillations are still phase 2
    CHECK(classify_phase(feats, cfg).final_label == PhaseLabel::P2_RegularOscConstTPF);

    const ObservableSeries wavy = synthetic(1.0, 400.0, 0.05,
                                            [](double t) { return 0.8 + 0.01 * std::sin(t); },
                                            [](double) { return 0.5; });
    for (const auto& w : window_features(wavy, cfg)) CHECK_FALSE(w.frozen);
}
