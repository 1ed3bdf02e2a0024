// Command-line front end: reads flat-text configs, runs the solvers and
// checks, writes JSON/CSV reports.
//
// Exit codes: 0 success, 1 hypothesis/validation failure, 2 config error,
// 3 numeric failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <atomic>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "liouville/config.hpp"
#include "liouville/fitting.hpp"
#include "liouville/errors.hpp"
#include "liouville/reports.hpp"

namespace lv = liouville;
namespace fs = std::filesystem;

namespace {

struct output_options {
    std::string dir = ".";
    bool emit_json = true;
    bool emit_csv = true;
    bool with_timestamp = true;
};

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

std::mutex log_mutex;  // workers share stdout

void note_written(const fs::path& path) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cout << "wrote " << path.string() << "\n";
}

void emit_json_report(const output_options& out, const std::string& stem,
                      const std::string& command, lv::ordered_json body) {
    if (!out.emit_json) return;
    lv::ordered_json doc;
    doc["schema"] = lv::json_schema;
    doc["command"] = command;
    if (out.with_timestamp) doc["timestamp"] = iso_timestamp();
    doc.update(body);
    const fs::path path = fs::path(out.dir) / (stem + "." + command + ".json");
    lv::write_file_atomic(path.string(), doc.dump(2) + "\n");
    note_written(path);
}

void emit_csv(const output_options& out, const std::string& stem,
              const std::string& kind, const std::string& content) {
    if (!out.emit_csv) return;
    const fs::path path = fs::path(out.dir) / (stem + "." + kind + ".csv");
    lv::write_file_atomic(path.string(), content);
    note_written(path);
}

lv::coupling_matrix matrix_from(const lv::config& cfg) {
    return lv::coupling_matrix::make(cfg.matrix("A"));
}

struct profile_inputs {
    lv::coupling_matrix a;
    std::vector<double> h0, u0, target;
    double r_max, tol;
    bool has_target = false;
    double shoot_tol = 1e-6;
};

struct overrides {
    double r_max = 0, tol = 0;
    std::vector<double> target_sigma;
    std::vector<double> eps_list;
};

profile_inputs profile_from(const lv::config& cfg, double r_max_default,
                            const overrides& ov) {
    profile_inputs in{matrix_from(cfg), {}, {}, {}, 0, 0, false};
    const int n = in.a.n();
    in.h0 = cfg.numbers_or("h0", std::vector<double>(n, 1.0));
    in.u0 = cfg.numbers_or("u0", std::vector<double>(n, 0.0));
    in.r_max =
        ov.r_max > 0 ? ov.r_max : cfg.number_or("r_max", r_max_default);
    in.tol = ov.tol > 0 ? ov.tol : cfg.number_or("tol", 1e-10);
    if (!ov.target_sigma.empty()) {
        in.target = ov.target_sigma;
        in.has_target = true;
    } else if (cfg.has("target_sigma")) {
        in.target = cfg.numbers("target_sigma");
        in.has_target = true;
    }
    in.shoot_tol = cfg.number_or("shoot_tol", 1e-6);
    return in;
}

lv::radial_profile solve_profile(const profile_inputs& in) {
    if (in.has_target) {
        lv::shooting_options opts;
        opts.r_max = in.r_max;
        opts.ode_tol = in.tol;
        opts.tol = in.shoot_tol;
        return lv::shoot_for_energies(in.a, in.h0, in.target, opts);
    }
    return lv::integrate_entire(in.a, in.h0, in.u0, in.r_max, in.tol);
}

lv::lattice2 lattice_from(const lv::config& cfg) {
    if (!cfg.has("cell")) return lv::lattice2::make({1, 0}, {0, 1});
    const auto rows = cfg.rows("cell");
    if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2)
        throw lv::config_error("cell must be two 2-vectors");
    return lv::lattice2::make({rows[0][0], rows[0][1]},
                              {rows[1][0], rows[1][1]});
}

std::optional<lv::fourier_series2> weight_from(const lv::config& cfg,
                                               const lv::lattice2& lat,
                                               const std::string& key) {
    if (!cfg.has(key)) return std::nullopt;
    std::vector<lv::fourier_series2::term> terms;
    for (const auto& row : cfg.rows(key)) {
        if (row.size() != 4)
            throw lv::config_error(
                key + ": each term is [m1, m2, cos_coef, sin_coef]");
        terms.push_back({static_cast<int>(row[0]), static_cast<int>(row[1]),
                         row[2], row[3]});
    }
    return lv::fourier_series2(lat, std::move(terms));
}

int cmd_check_matrix(const std::string& cfg_path, const output_options& out) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto a = matrix_from(cfg);
    const auto h1 = lv::check_h1(a);

    lv::ordered_json body;
    body["n"] = a.n();
    body["h1"] = lv::report_json(h1);
    if (a.invertible()) body["h2"] = lv::report_json(lv::check_h2(a));
    if (h1.holds()) {
        try {
            const auto q = lv::find_q(a);
            body["Q"] = q;
            body["Q_masses"] = lv::masses(a, q);
        } catch (const lv::validation_error& e) {
            body["Q_error"] = e.what();
        }
        if (cfg.has("rho")) {
            const auto rho = cfg.numbers("rho");
            const double tol = cfg.number_or("tol", 1e-8);
            body["gamma1"] = lv::report_json(lv::gamma1(a, rho, tol));
            body["lambda_I"] = lv::lambda_full(a, rho);
            body["masses"] = lv::masses(a, rho);
        }
    }
    emit_json_report(out, stem_of(cfg_path), "check-matrix", std::move(body));
    return h1.holds() ? 0 : 1;
}

int cmd_solve_entire(const std::string& cfg_path, const output_options& out,
                     const overrides& ov) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto in = profile_from(cfg, 1e4, ov);
    const auto p = solve_profile(in);
    const auto s = lv::energy_total(p);
    const double residual = lv::pohozaev_residual(s, p.matrix());

    lv::ordered_json body;
    body["summary"] = lv::report_json(s);
    body["pohozaev_residual"] = residual;
    body["max_local_error"] = p.max_local_error();
    emit_json_report(out, stem_of(cfg_path), "solve-entire", std::move(body));
    emit_csv(out, stem_of(cfg_path), "profile", lv::profile_csv(p));
    return std::abs(residual) <= 1e-4 ? 0 : 1;
}

int cmd_pohozaev_check(const std::string& cfg_path, const output_options& out,
                       const overrides& ov) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto in = profile_from(cfg, 1e4, ov);
    const auto p = solve_profile(in);
    const auto s = lv::energy_total(p);
    const double residual = lv::pohozaev_residual(s, p.matrix());

    // Finite-radius identity along dyadic checkpoints, plus its decay order.
    std::vector<std::pair<double, double>> series;
    for (double r = 10.0; r <= std::pow(p.r_max(), 0.75) * (1 + 1e-9);
         r *= 2.0)
        series.emplace_back(1.0 / r,
                            std::abs(lv::finite_r_pohozaev_check(p, s, r)));
    const auto fit = lv::order_fit(series, false);

    lv::ordered_json body;
    body["pohozaev_residual"] = residual;
    body["summary"] = lv::report_json(s);
    lv::ordered_json finite = lv::ordered_json::object();
    for (const auto& [inv_r, value] : series)
        finite[std::to_string(1.0 / inv_r)] = value;
    body["finite_R_residual"] = finite;
    body["residual_decay_exponent"] = -fit.exponent;
    emit_json_report(out, stem_of(cfg_path), "pohozaev-check",
                     std::move(body));
    return std::abs(residual) <= 1e-4 ? 0 : 1;
}

int cmd_kernel(const std::string& cfg_path, const output_options& out,
               const overrides& ov) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto in = profile_from(cfg, 1e3, ov);
    const int ell_max = static_cast<int>(cfg.number_or("ell_max", 3));
    const auto p = solve_profile(in);
    const auto s = lv::energy_total(p);

    lv::ordered_json body;
    const auto k0 = lv::known_kernel_mode0(p);
    const auto k1 = lv::known_kernel_mode1(p);
    body["mode0_residual"] = k0.residual;
    body["mode1_residual"] = k1.residual;
    // Scaling-mode endpoint: r u' + 2 -> 2 - l.
    std::vector<double> endpoints;
    for (int i = 0; i < p.n(); ++i)
        endpoints.push_back(
            k0.sol.phi_node(i, k0.sol.grid().size() - 1));
    body["mode0_endpoint"] = endpoints;
    body["mode0_endpoint_expected"] = [&] {
        std::vector<double> v;
        for (double l : s.l_direct) v.push_back(2.0 - l);
        return v;
    }();
    body["mode1_decay_exponents"] = lv::decay_check_mode1(k1.sol);
    // The scaling mode witnesses a bounded direction at ell = 0.
    body["mode0_bounded_witness"] = k0.residual < 1e-6;

    bool dims_ok = true;
    lv::ordered_json probes = lv::ordered_json::array();
    for (int ell = 1; ell <= ell_max; ++ell) {
        const auto rep = lv::uniqueness_probe({&p, ell}, p.r_max());
        probes.push_back(lv::report_json(rep));
        const int expected = (ell == 1) ? 1 : 0;
        if (rep.bounded_dim != expected) dims_ok = false;
    }
    body["probes"] = probes;
    body["bounded_dims_expected"] = dims_ok;
    emit_json_report(out, stem_of(cfg_path), "kernel", std::move(body));
    emit_csv(out, stem_of(cfg_path), "mode0", lv::mode_solution_csv(k0.sol));
    emit_csv(out, stem_of(cfg_path), "mode1", lv::mode_solution_csv(k1.sol));
    return dims_ok ? 0 : 1;
}

int cmd_green_torus(const std::string& cfg_path, const output_options& out) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto lat = lattice_from(cfg);
    const double eta = cfg.number_or("eta", 0.0);
    const lv::torus_green tg(lat, eta);

    const auto xv = cfg.numbers_or("x", {0.13, 0.62});
    const auto yv = cfg.numbers_or("y", {0.58, 0.21});
    const lv::vec2 x{xv[0], xv[1]}, y{yv[0], yv[1]};

    lv::ordered_json body;
    body["eta"] = tg.eta();
    body["G"] = tg.green(x, y);
    body["gamma"] = tg.gamma(x, y);
    body["gamma_diag"] = tg.gamma_diag();
    const lv::vec2 g1 = tg.grad1_gamma(x);
    body["grad1_gamma_diag"] = std::vector<double>{g1.x, g1.y};

    // Self-checks.
    const double sym = std::abs(tg.green(x, y) - tg.green(y, x));
    const double per =
        std::abs(tg.green(x + lat.e1() + lat.e2() * -2.0, y) - tg.green(x, y));
    const lv::torus_green tg2(lat, 2.0 * tg.eta());
    const double eta_gap = std::abs(tg.green(x, y) - tg2.green(x, y));
    const double eps = 1e-4;
    const double mean = lv::integrate_centered_cell(
                            lat, [&](lv::vec2 d) { return tg.green(y + d, y); },
                            eps) +
                        eps * eps * (1 - 2 * std::log(eps)) / 4.0 +
                        lv::pi * eps * eps * tg.gamma_diag();
    body["checks"] = lv::ordered_json{{"symmetry_gap", sym},
                                      {"periodicity_gap", per},
                                      {"eta_independence_gap", eta_gap},
                                      {"mean_value", mean},
                                      {"grad1_gamma_norm", g1.norm()}};

    // Optional tail-coefficient report with the extrapolation table.
    bool tail_ok = true;
    if (cfg.has("m")) {
        lv::tail_coefficient_input in;
        in.m = cfg.number("m");
        const auto pv = cfg.numbers_or("p", {0.5, 0.5});
        in.p = {pv[0], pv[1]};
        const auto h = weight_from(cfg, lat, "h");
        in.h = h ? &*h : nullptr;
        const auto tail = lv::tail_coefficient(in, tg);
        body["tail_coefficient"] = lv::report_json(tail);
        tail_ok = tail.agree;
    }
    emit_json_report(out, stem_of(cfg_path), "green-torus", std::move(body));
    const bool ok = sym < 1e-12 && per < 1e-12 && eta_gap < 1e-10 &&
                    std::abs(mean) < 1e-8 && g1.norm() < 1e-10 && tail_ok;
    return ok ? 0 : 1;
}

int cmd_leading_term(const std::string& cfg_path, const output_options& out,
                     const overrides& ov) {
    const auto cfg = lv::config::parse_file(cfg_path);
    const auto a = matrix_from(cfg);
    const auto rho = cfg.numbers("rho");
    const auto lat = lattice_from(cfg);

    lv::torus_geometry geom;
    geom.lat = lat;
    geom.eta = cfg.number_or("eta", 0.0);
    const auto pv = cfg.numbers_or("p", {0.5, 0.5});
    geom.p = {pv[0], pv[1]};
    geom.curvature = cfg.number_or("curvature", 0.0);
    geom.h.resize(a.n());
    for (int i = 0; i < a.n(); ++i)
        geom.h[i] = weight_from(cfg, lat, "h" + std::to_string(i + 1));

    lv::scenario_options opts;
    opts.r_max = ov.r_max > 0 ? ov.r_max : cfg.number_or("r_max", 1e4);
    opts.ode_tol = ov.tol > 0 ? ov.tol : cfg.number_or("tol", 1e-10);
    auto eps_list =
        !ov.eps_list.empty()
            ? ov.eps_list
            : cfg.numbers_or("eps_list", {1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
    for (const auto& row : cfg.has("rho_sequence")
                               ? cfg.rows("rho_sequence")
                               : std::vector<std::vector<double>>{})
        opts.rho_sequence.push_back(row);
    opts.mass_window_constant = cfg.number_or("mass_window_constant", 10.0);

    const auto sc = lv::make_scenario(a, rho, std::move(geom),
                                      std::move(eps_list), opts);
    const auto rep = lv::scenario_report(sc);

    lv::ordered_json body = lv::report_json(rep);
    emit_json_report(out, stem_of(cfg_path), "leading-term", std::move(body));
    emit_csv(out, stem_of(cfg_path), "series",
             lv::series_csv(rep.predicted, "lambda_I"));
    const bool ok = rep.regime == lv::bubble_regime::critical
                        ? !rep.b.empty()
                        : rep.d_routes_agree;
    return ok ? 0 : 1;
}

int cmd_order_fit(const std::string& cfg_path, const output_options& out) {
    const auto cfg = lv::config::parse_file(cfg_path);
    std::vector<std::pair<double, double>> series;
    for (const auto& row : cfg.rows("series")) {
        if (row.size() != 2)
            throw lv::config_error("series rows must be [eps, value]");
        series.emplace_back(row[0], row[1]);
    }
    const bool log_corr = cfg.number_or("log_correction", 0.0) != 0.0;
    const auto fit = lv::order_fit(series, log_corr);

    lv::ordered_json body;
    body["exponent"] = fit.exponent;
    body["constant"] = fit.constant;
    body["rms"] = fit.rms;
    body["sign_warning"] = fit.sign_warning;
    body["log_corrected"] = fit.log_corrected;
    emit_json_report(out, stem_of(cfg_path), "order-fit", std::move(body));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for coupled exponential-nonlinearity "
                 "systems on the plane and flat torus"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    output_options out;
    if (const char* env = std::getenv("LIOUVILLE_OUTPUT_DIR")) out.dir = env;
    app.add_option("-o,--output-dir", out.dir, "Directory for reports");
    bool no_timestamp = false;
    app.add_flag("--no-timestamp", no_timestamp,
                 "Omit the timestamp field from JSON reports");
    std::string emit = "json,csv";
    app.add_option("--emit", emit, "Comma list of json,csv");
    overrides ov;
    app.add_option("--r-max", ov.r_max, "Override config r_max");
    app.add_option("--tol", ov.tol, "Override config tol");
    app.add_option("--target-sigma", ov.target_sigma,
                   "Route solve-entire through the energy shooting solver");
    app.add_option("--eps-list", ov.eps_list,
                   "Override the scenario eps list");
    int jobs = 1;
    app.add_option("--jobs", jobs, "Parallel scenarios for leading-term");

    std::string cfg_path;
    std::vector<std::string> cfg_paths;
    auto add_cfg = [&](CLI::App* sub) {
        sub->add_option("config", cfg_path, "Config file")->required();
    };
    auto* sc_check = app.add_subcommand("check-matrix",
                                        "Coupling-matrix hypothesis report");
    add_cfg(sc_check);
    auto* sc_solve =
        app.add_subcommand("solve-entire", "Entire radial solution + energies");
    add_cfg(sc_solve);
    auto* sc_poho = app.add_subcommand(
        "pohozaav-check", "Energy-identity residual and its decay order");
    add_cfg(sc_poho);
    auto* sc_poho_alias =
        app.add_subcommand("pohozaev-check", "Alias of pohozaav-check");
    add_cfg(sc_poho_alias);
    auto* sc_kernel =
        app.add_subcommand("kernel", "Linearized-kernel uniqueness probes");
    add_cfg(sc_kernel);
    auto* sc_green =
        app.add_subcommand("green-torus", "Flat-torus Green function checks");
    add_cfg(sc_green);
    auto* sc_lead = app.add_subcommand(
        "leading-term", "Blowup leading-term report for one or more configs");
    sc_lead->add_option("configs", cfg_paths, "Config files")->required();
    auto* sc_fit = app.add_subcommand("order-fit", "Log-log order fit");
    add_cfg(sc_fit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    out.with_timestamp = !no_timestamp;
    out.emit_json = emit.find("json") != std::string::npos;
    out.emit_csv = emit.find("csv") != std::string::npos;

    try {
        fs::create_directories(out.dir);
        if (sc_check->parsed()) return cmd_check_matrix(cfg_path, out);
        if (sc_solve->parsed()) return cmd_solve_entire(cfg_path, out, ov);
        if (sc_poho->parsed() || sc_poho_alias->parsed())
            return cmd_pohozaev_check(cfg_path, out, ov);
        if (sc_kernel->parsed()) return cmd_kernel(cfg_path, out, ov);
        if (sc_green->parsed()) return cmd_green_torus(cfg_path, out);
        if (sc_fit->parsed()) return cmd_order_fit(cfg_path, out);
        if (sc_lead->parsed()) {
            // Independent scenarios; optional thread pool.
            std::vector<int> codes(cfg_paths.size(), 0);
            std::vector<std::string> errors(cfg_paths.size());
            const int workers =
                std::max(1, std::min<int>(jobs, cfg_paths.size()));
            std::atomic<std::size_t> next{0};
            auto work = [&] {
                for (std::size_t i = next++; i < cfg_paths.size();
                     i = next++) {
                    try {
                        codes[i] = cmd_leading_term(cfg_paths[i], out, ov);
                    } catch (const lv::config_error& e) {
                        codes[i] = 2;
                        errors[i] = e.what();
                    } catch (const lv::validation_error& e) {
                        codes[i] = 1;
                        errors[i] = e.what();
                    } catch (const std::exception& e) {
                        codes[i] = 3;
                        errors[i] = e.what();
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int w = 1; w < workers; ++w) pool.emplace_back(work);
            work();
            for (auto& th : pool) th.join();
            int worst = 0;
            for (std::size_t i = 0; i < codes.size(); ++i) {
                if (!errors[i].empty())
                    std::cerr << cfg_paths[i] << ": " << errors[i] << "\n";
                worst = std::max(worst, codes[i]);
            }
            return worst;
        }
    } catch (const lv::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lv::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const lv::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
