#include "qmm/run_card.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qmm/errors.hpp"

namespace qmm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ValidationError(name + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& name, int line, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        fail(name, line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail(name, line, "trailing characters after number in '" + v + "'");
    return out;
}

Model parse_model(const std::string& name, int line, const std::string& v) {
    if (v == "qmm11") return Model::qmm11;
    if (v == "qmm22") return Model::qmm22;
    if (v == "qmm23") return Model::qmm23;
    if (v == "qmm33") return Model::qmm33;
    if (v == "hybrid22") return Model::hybrid22;
    fail(name, line, "unknown model '" + v + "'");
}

std::vector<std::pair<double, double>> parse_windows(const std::string& name, int line,
                                                     const std::string& v) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) fail(name, line, "plot window must be 'start:stop'");
        const double lo = parse_num(name, line, trim(item.substr(0, colon)));
        const double hi = parse_num(name, line, trim(item.substr(colon + 1)));
        if (!(hi > lo)) fail(name, line, "plot window must have stop > start");
        out.emplace_back(lo, hi);
    }
    return out;
}

PhaseLabel parse_label(const std::string& name, int line, const std::string& v) {
    const PhaseLabel l = phase_label_from_string(v);
    if (l == PhaseLabel::Undecided && v != "undecided")
        fail(name, line, "unknown phase label '" + v + "'");
    return l;
}

} // namespace

RunCard parse_run_card(std::istream& in, const std::string& name) {
    RunCard card;
    card.name = name;
    bool mu_seen = false, mu_hat_seen = false;
    double mu_hat_value = 0;

    std::string section = "run";
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "couplings" && section != "output" &&
                section != "classifier")
                fail(name, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (val.empty()) fail(name, lineno, "empty value for '" + key + "'");

        auto& cfg = card.config;
        auto& c = cfg.couplings;
        if (section == "run") {
            if (key == "model") cfg.model = parse_model(name, lineno, val);
            else if (key == "a") cfg.a = parse_num(name, lineno, val);
            else if (key == "r") cfg.r = parse_num(name, lineno, val);
            else if (key == "theta0") cfg.theta0 = parse_num(name, lineno, val);
            else if (key == "phi0") cfg.phi0 = parse_num(name, lineno, val);
            else if (key == "t_end_in_a") cfg.t_end_in_a = parse_num(name, lineno, val);
            else if (key == "dt_in_a") cfg.dt_in_a = parse_num(name, lineno, val);
            else if (key == "engine") {
                if (val == "rk4_delay") cfg.engine = EngineKind::rk4_delay;
                else if (val == "method_of_steps") cfg.engine = EngineKind::method_of_steps;
                else fail(name, lineno, "unknown engine '" + val + "'");
            } else if (key == "representation") {
                if (val == "cartesian") cfg.representation = Representation::cartesian;
                else if (val == "polar") cfg.representation = Representation::polar;
                else fail(name, lineno, "unknown representation '" + val + "'");
            } else fail(name, lineno, "unknown key '" + key + "' in [run]");
        } else if (section == "couplings") {
            if (key == "mu") { c.mu = parse_num(name, lineno, val); mu_seen = true; }
            else if (key == "mu_t") c.mu_t = parse_num(name, lineno, val);
            else if (key == "mu_hat") { mu_hat_value = parse_num(name, lineno, val); mu_hat_seen = true; }
            else if (key == "lambda_re") c.lambda_re = parse_num(name, lineno, val);
            else if (key == "lambda_im") c.lambda_im = parse_num(name, lineno, val);
            else if (key == "eta") c.eta = parse_num(name, lineno, val);
            else if (key == "kappa_re") c.kappa_re = parse_num(name, lineno, val);
            else if (key == "kappa_im") c.kappa_im = parse_num(name, lineno, val);
            else if (key == "b_ext_x") c.b_ext.x = parse_num(name, lineno, val);
            else if (key == "b_ext_y") c.b_ext.y = parse_num(name, lineno, val);
            else if (key == "b_ext_z") c.b_ext.z = parse_num(name, lineno, val);
            else if (key == "b_kicker_y") c.b_kicker_y = parse_num(name, lineno, val);
            else fail(name, lineno, "unknown key '" + key + "' in [couplings]");
        } else if (section == "output") {
            if (key == "decimate") {
                card.output.decimate = static_cast<int>(parse_num(name, lineno, val));
                if (card.output.decimate < 1) fail(name, lineno, "decimate must be >= 1");
            } else if (key == "plot_windows") {
                card.output.plot_windows = parse_windows(name, lineno, val);
            } else fail(name, lineno, "unknown key '" + key + "' in [output]");
        } else {  // classifier
            auto& cc = card.classifier;
            if (key == "window_in_a") cc.window_in_a = parse_num(name, lineno, val);
            else if (key == "stride_in_a") cc.stride_in_a = parse_num(name, lineno, val);
            else if (key == "burn_in_frac") cc.burn_in_frac = parse_num(name, lineno, val);
            else if (key == "persist_windows")
                cc.persist_windows = static_cast<int>(parse_num(name, lineno, val));
            else if (key == "classify_decimate")
                card.classify_decimate = static_cast<int>(parse_num(name, lineno, val));
            else if (key == "expected_label")
                card.expected_label = parse_label(name, lineno, val);
            else if (key == "expected_transition") {
                const auto colon = val.find(':');
                if (colon == std::string::npos)
                    fail(name, lineno, "expected_transition must be 'FROM:TO'");
                card.expected_transition = {parse_label(name, lineno, trim(val.substr(0, colon))),
                                            parse_label(name, lineno, trim(val.substr(colon + 1)))};
            } else fail(name, lineno, "unknown key '" + key + "' in [classifier]");
        }
    }

    if (mu_hat_seen) {
        if (mu_seen)
            throw ValidationError(name + ": both mu and mu_hat given; they set the same coupling");
        card.config.couplings.mu = mu_hat_value - card.config.couplings.lambda_re;
    }
    card.config.validate();
    return card;
}

RunCard load_run_card(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open run card: " + path);
    return parse_run_card(in, path);
}

} // namespace qmm
