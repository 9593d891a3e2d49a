#include "mnpiv/cli.hpp"

#include "mnpiv/basis.hpp"
#include "mnpiv/dgp.hpp"
#include "mnpiv/miv_test.hpp"
#include "mnpiv/npiv.hpp"
#include "mnpiv/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace mnpiv {

namespace {

using json = nlohmann::ordered_json;

struct CliError : std::runtime_error {
    int code;
    CliError(int code_, const std::string& msg) : std::runtime_error(msg), code(code_) {}
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV input: header `y,x,w` (or `x,w`), plain decimal numbers
// ---------------------------------------------------------------------------

struct CsvData {
    std::vector<double> y, x, w;
    bool has_y = false;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front())))
            f.erase(f.begin());
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back())))
            f.pop_back();
    }
    return out;
}

CsvData read_csv(const std::string& path, bool require_y) {
    std::ifstream in(path);
    if (!in) throw CliError(2, "cannot open input file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw CliError(2, path + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);  // UTF-8 BOM

    auto header = split_csv_line(line);
    for (auto& h : header)
        std::transform(h.begin(), h.end(), h.begin(),
                       [](unsigned char c) { return std::tolower(c); });
    int iy = -1, ix = -1, iw = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") iy = static_cast<int>(c);
        else if (header[c] == "x") ix = static_cast<int>(c);
        else if (header[c] == "w") iw = static_cast<int>(c);
        else throw CliError(2, path + ": unexpected column `" + header[c] + "` in header");
    }
    if (ix < 0) throw CliError(2, path + ": missing column `x` in header");
    if (iw < 0) throw CliError(2, path + ": missing column `w` in header");
    if (require_y && iy < 0) throw CliError(2, path + ": missing column `y` in header");

    CsvData data;
    data.has_y = iy >= 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw CliError(2, path + ": line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        auto parse = [&](int col) {
            const std::string& f = fields[static_cast<std::size_t>(col)];
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
                throw CliError(2, path + ": line " + std::to_string(lineno) +
                                      ": not a finite number: `" + f + "`");
            return v;
        };
        data.x.push_back(parse(ix));
        data.w.push_back(parse(iw));
        if (iy >= 0) data.y.push_back(parse(iy));
    }
    if (data.x.size() < 2)
        throw CliError(2, path + ": need at least 2 data rows");
    return data;
}

Sample sample_from_csv(const CsvData& data, const std::string& rescale) {
    RescaleMeta::Kind kind;
    if (rescale == "minmax") kind = RescaleMeta::Kind::MinMax;
    else if (rescale == "ecdf") kind = RescaleMeta::Kind::Ecdf;
    else throw CliError(2, "unknown rescale mode: " + rescale);
    const Eigen::Index n = static_cast<Eigen::Index>(data.x.size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n), x(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = data.x[static_cast<std::size_t>(i)];
        w[i] = data.w[static_cast<std::size_t>(i)];
        if (data.has_y) y[i] = data.y[static_cast<std::size_t>(i)];
    }
    return make_sample_rescaled(std::move(y), std::move(x), std::move(w), kind);
}

json rescale_meta_json(const RescaleMeta& meta) {
    json j;
    switch (meta.kind) {
        case RescaleMeta::Kind::Identity: j["kind"] = "identity"; break;
        case RescaleMeta::Kind::MinMax:
            j["kind"] = "minmax";
            j["lo"] = meta.lo;
            j["hi"] = meta.hi;
            break;
        case RescaleMeta::Kind::Ecdf:
            j["kind"] = "ecdf";
            j["n_support"] = meta.sorted.size();
            break;
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text,
                     std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CliError(2, "cannot open output file: " + path);
    f << text;
    if (!f) throw CliError(2, "failed writing output file: " + path);
}

void check_output_path(const std::string& path) {
    if (path.empty() || path == "-") return;
    std::ofstream probe(path, std::ios::binary | std::ios::app);
    if (!probe) throw CliError(2, "cannot open output file: " + path);
}

// ---------------------------------------------------------------------------
// subcommand state
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input, output = "-";
    bool constrained = false;
    int degree_x = 3, degree_w = 4;
    int kx_knots = 3, kw_knots = 4;
    int grid = 100;
    int constraint_grid = 401;
    std::string rescale = "minmax";
    double norm_bound = 0.0;  // 0 = off
};

struct TestArgs {
    std::string input, output = "-";
    double alpha = 0.05;
    int boot = 1000;
    std::uint64_t seed = 0;
    double u = 0.5;
    double epsilon = 0.05;
    double h_min = 0.0;
    double cdf_bandwidth = 0.3;
    std::string rescale = "minmax";
    int threads = 0;
};

struct McArgs {
    int model = 1;
    std::string output = "-", plot_output;
    int reps = 500;
    int n = 500;
    std::vector<double> sigma{0.1};
    std::vector<int> kx{3};
    std::vector<int> kw{4};
    std::vector<double> kappa{1.0};
    double rho = 0.3, eta = 0.3;
    int degree_x = 3, degree_w = 4;
    int grid = 100;
    int constraint_grid = 401;
    std::uint64_t seed = 0;
    int threads = 0;
};

struct DiagnoseArgs {
    std::string input, design, output = "-";
    double rho = 0.5;
    std::vector<int> K{4, 6, 8, 10};
    std::vector<std::string> a_list;
    std::vector<double> trunc{0.05, 0.95};
    std::vector<double> zeta;  // c_f,c_w,C_F,w1,w2,x1,x2,xt1,xt2
    int degree_x = 3, degree_w = 3;
    double alpha = 0.05;
    std::string rescale = "minmax";
};

json basis_json(const SplineBasis& b) {
    json j;
    j["degree"] = b.degree;
    j["interior_knots"] = std::vector<double>(
        b.interior_knots.data(), b.interior_knots.data() + b.interior_knots.size());
    j["dim"] = b.dim;
    return j;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    check_output_path(a.output);
    const CsvData data = read_csv(a.input, /*require_y=*/true);

    NpivConfig config;
    Sample sample = sample_from_csv(data, a.rescale);
    try {
        config.basis_x = make_basis(a.degree_x, a.kx_knots);
        config.basis_w = make_basis(a.degree_w, a.kw_knots);
        config.constrained = a.constrained;
        config.constraint_grid_size = a.constraint_grid;
        if (a.norm_bound > 0.0) config.norm_bound = a.norm_bound;
    } catch (const std::invalid_argument& e) {
        throw CliError(2, e.what());
    }

    const NpivFit fitted = fit(sample, config);

    const double lo = sample.meta_x.kind == RescaleMeta::Kind::MinMax
                          ? sample.meta_x.lo
                          : (sample.meta_x.kind == RescaleMeta::Kind::Ecdf
                                 ? sample.meta_x.sorted.front()
                                 : 0.0);
    const double hi = sample.meta_x.kind == RescaleMeta::Kind::MinMax
                          ? sample.meta_x.hi
                          : (sample.meta_x.kind == RescaleMeta::Kind::Ecdf
                                 ? sample.meta_x.sorted.back()
                                 : 1.0);
    Eigen::VectorXd xgrid(a.grid);
    for (int i = 0; i < a.grid; ++i)
        xgrid[i] = lo + (hi - lo) * static_cast<double>(i) / (a.grid - 1);
    const Eigen::VectorXd preds = predict(fitted, xgrid);

    json j;
    j["schema_version"] = 1;
    j["command"] = "fit";
    j["config"] = {{"input", a.input},
                   {"constrained", a.constrained},
                   {"basis_x", basis_json(config.basis_x)},
                   {"basis_w", basis_json(config.basis_w)},
                   {"constraint_grid_size", a.constraint_grid},
                   {"norm_bound", a.norm_bound > 0.0 ? json(a.norm_bound) : json()},
                   {"rescale", a.rescale},
                   {"grid", a.grid},
                   {"n", sample.n()}};
    j["rescale_x"] = rescale_meta_json(sample.meta_x);
    j["rescale_w"] = rescale_meta_json(sample.meta_w);
    j["beta"] = std::vector<double>(fitted.beta.data(),
                                    fitted.beta.data() + fitted.beta.size());
    j["knots"] = std::vector<double>(
        config.basis_x.interior_knots.data(),
        config.basis_x.interior_knots.data() + config.basis_x.interior_knots.size());
    j["degree"] = config.basis_x.degree;
    j["constrained"] = fitted.constrained;
    j["min_slope_hat"] = fitted.min_slope_hat;
    j["tau_hat"] = fitted.tau_hat;
    j["objective"] = fitted.objective;
    j["constraints_at_knots_only"] = config.basis_x.degree <= 2;
    j["constraint_points"] = fitted.constraint_grid.size();
    j["constraint_grid_refined"] = fitted.grid_refined;
    j["qp"] = {{"status", fitted.qp_diag.status == QpStatus::Optimal ? "optimal"
                          : fitted.qp_diag.status == QpStatus::MaxIter ? "max_iter"
                                                                       : "degenerate"},
               {"iterations", fitted.qp_diag.iterations},
               {"kkt_residual", fitted.qp_diag.kkt_residual},
               {"active_constraints", fitted.qp_diag.active_set.size()}};
    j["predictions"] = {
        {"x", std::vector<double>(xgrid.data(), xgrid.data() + xgrid.size())},
        {"g_hat", std::vector<double>(preds.data(), preds.data() + preds.size())}};

    write_text_file(a.output, j.dump(2) + "\n", out);
    return 0;
}

int cmd_test_miv(const TestArgs& a, std::ostream& out) {
    check_output_path(a.output);
    const CsvData data = read_csv(a.input, /*require_y=*/false);
    Sample sample = sample_from_csv(data, a.rescale);

    MivTestConfig config;
    config.alpha = a.alpha;
    config.n_boot = a.boot;
    config.seed = a.seed;
    config.u = a.u;
    config.epsilon = a.epsilon;
    config.h_min = a.h_min;
    config.cdf_bandwidth = a.cdf_bandwidth;
    config.threads = a.threads;

    const MivTestResult res = monotone_iv_test(sample, config);

    json j;
    j["schema_version"] = 1;
    j["command"] = "test-miv";
    j["config"] = {{"input", a.input},
                   {"alpha", a.alpha},
                   {"n_boot", a.boot},
                   {"seed", a.seed},
                   {"u", a.u},
                   {"epsilon", a.epsilon},
                   {"h_min", a.h_min},
                   {"cdf_bandwidth", a.cdf_bandwidth},
                   {"rescale", a.rescale},
                   {"n", sample.n()}};
    j["statistic"] = res.statistic;
    j["critical_value"] = res.critical_value;
    j["p_value"] = res.p_value;
    j["alpha"] = a.alpha;
    j["bandwidths"] = res.bandwidths;
    j["argmax"] = {{"x", res.argmax.x}, {"w", res.argmax.w}, {"h", res.argmax.h}};
    j["reject"] = res.reject;

    write_text_file(a.output, j.dump(2) + "\n", out);
    return 0;
}

int cmd_mc(const McArgs& a, std::ostream& out) {
    check_output_path(a.output);
    if (!a.plot_output.empty()) check_output_path(a.plot_output);
    if (a.model != 1 && a.model != 2) throw CliError(2, "--model must be 1 or 2");

    std::string table =
        "model,n,reps,rho,eta,sigma,kx,kw,kappa,"
        "bias_sq_uncon,var_uncon,mse_uncon,bias_sq_con,var_con,mse_con,mse_ratio\n";
    std::string plot =
        "sigma,kx,kw,kappa,x,true_g,mean_uncon,lo_uncon,hi_uncon,mean_con,lo_con,hi_con\n";

    for (double sigma : a.sigma)
        for (int kx : a.kx)
            for (int kw : a.kw)
                for (double kappa : a.kappa) {
                    McConfig mc;
                    mc.spec.family =
                        a.model == 1 ? DgpFamily::Model1 : DgpFamily::Model2;
                    mc.spec.kappa = kappa;
                    mc.spec.rho = a.rho;
                    mc.spec.eta = a.eta;
                    mc.spec.sigma_eps = sigma;
                    mc.spec.n = a.n;
                    // kx/kw follow the table convention: the knot sequence
                    // counted with both boundary knots, so kx-2 interior knots
                    if (kx < 2 || kw < 2)
                        throw CliError(2, "mc: knot counts must be >= 2 "
                                          "(boundary knots included)");
                    try {
                        mc.npiv.basis_x = make_basis(a.degree_x, kx - 2);
                        mc.npiv.basis_w = make_basis(a.degree_w, kw - 2);
                    } catch (const std::invalid_argument& e) {
                        throw CliError(2, e.what());
                    }
                    mc.npiv.constraint_grid_size = a.constraint_grid;
                    mc.replications = a.reps;
                    mc.eval_grid = a.grid;
                    mc.seed = a.seed;
                    mc.threads = a.threads;

                    const McReport rep = mc_study(mc);
                    std::ostringstream row;
                    row << a.model << ',' << a.n << ',' << a.reps << ','
                        << fmt_double(a.rho) << ',' << fmt_double(a.eta) << ','
                        << fmt_double(sigma) << ',' << kx << ',' << kw << ','
                        << fmt_double(kappa) << ','
                        << fmt_double(rep.unconstrained.bias_sq) << ','
                        << fmt_double(rep.unconstrained.variance) << ','
                        << fmt_double(rep.unconstrained.mse) << ','
                        << fmt_double(rep.constrained.bias_sq) << ','
                        << fmt_double(rep.constrained.variance) << ','
                        << fmt_double(rep.constrained.mse) << ','
                        << fmt_double(rep.mse_ratio) << '\n';
                    table += row.str();

                    if (!a.plot_output.empty()) {
                        for (Eigen::Index g = 0; g < rep.grid.size(); ++g) {
                            std::ostringstream pr;
                            pr << fmt_double(sigma) << ',' << kx << ',' << kw << ','
                               << fmt_double(kappa) << ',' << fmt_double(rep.grid[g])
                               << ',' << fmt_double(rep.true_values[g]) << ','
                               << fmt_double(rep.mean_uncon[g]) << ','
                               << fmt_double(rep.mean_uncon[g] - 2.0 * rep.sd_uncon[g])
                               << ','
                               << fmt_double(rep.mean_uncon[g] + 2.0 * rep.sd_uncon[g])
                               << ',' << fmt_double(rep.mean_con[g]) << ','
                               << fmt_double(rep.mean_con[g] - 2.0 * rep.sd_con[g])
                               << ','
                               << fmt_double(rep.mean_con[g] + 2.0 * rep.sd_con[g])
                               << '\n';
                            plot += pr.str();
                        }
                    }
                }

    write_text_file(a.output, table, out);
    if (!a.plot_output.empty()) write_text_file(a.plot_output, plot, out);
    return 0;
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    check_output_path(a.output);
    const bool population = !a.design.empty();
    if (population && a.design != "normal")
        throw CliError(2, "--design must be `normal` (Gaussian copula)");
    if (!population && a.input.empty())
        throw CliError(2, "diagnose needs --input or --design");
    if (a.trunc.size() != 2 || !(a.trunc[0] < a.trunc[1]))
        throw CliError(2, "--trunc expects `lo hi` with lo < hi");

    std::optional<Sample> sample;
    std::optional<NormalCopulaDesign> design;
    bool have_y = false;
    if (population) {
        design = NormalCopulaDesign{a.rho};
    } else {
        const CsvData data = read_csv(a.input, /*require_y=*/false);
        have_y = data.has_y;
        sample = sample_from_csv(data, a.rescale);
    }

    std::vector<double> a_values;
    for (const auto& s : a.a_list) {
        if (s == "inf" || s == "INF" || s == "Inf") {
            a_values.push_back(std::numeric_limits<double>::infinity());
        } else {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size() || v < 0.0)
                throw CliError(2, "--a values must be nonnegative numbers or `inf`");
            a_values.push_back(v);
        }
    }

    json j;
    j["schema_version"] = 1;
    j["command"] = "diagnose";
    j["config"] = {{"mode", population ? "population" : "empirical"},
                   {"input", a.input},
                   {"design", a.design},
                   {"rho", a.rho},
                   {"K", a.K},
                   {"a", a.a_list},
                   {"trunc", a.trunc},
                   {"degree_x", a.degree_x},
                   {"degree_w", a.degree_w},
                   {"alpha", a.alpha}};

    json taus = json::array();
    for (int K : a.K) {
        NpivConfig config;
        try {
            if (K - a.degree_x - 1 < 0 || K - a.degree_w - 1 < 0)
                throw CliError(2, "--K " + std::to_string(K) +
                                      " smaller than degree+1 of a basis");
            config.basis_x = make_basis(a.degree_x, K - a.degree_x - 1);
            config.basis_w = make_basis(a.degree_w, K - a.degree_w - 1);
        } catch (const std::invalid_argument& e) {
            throw CliError(2, e.what());
        }
        json entry;
        entry["K"] = K;
        entry["tau_hat"] = population ? sieve_tau_hat(*design, config)
                                      : sieve_tau_hat(*sample, config);
        if (!a_values.empty()) {
            json restricted = json::array();
            for (std::size_t i = 0; i < a_values.size(); ++i) {
                const double v =
                    population
                        ? restricted_tau_hat(*design, config, a_values[i], a.trunc[0],
                                             a.trunc[1])
                        : restricted_tau_hat(*sample, config, a_values[i], a.trunc[0],
                                             a.trunc[1]);
                restricted.push_back(
                    {{"a", a.a_list[i]}, {"lower_bound_heuristic", v}});
            }
            entry["restricted_tau"] = restricted;
        }
        taus.push_back(entry);
    }
    j["tau"] = taus;

    if (!a.zeta.empty()) {
        if (a.zeta.size() != 9)
            throw CliError(2, "--zeta expects 9 values: c_f c_w C_F w1 w2 x1 x2 xt1 xt2");
        IdentificationConstants z;
        z.c_f = a.zeta[0];
        z.c_w = a.zeta[1];
        z.C_F = a.zeta[2];
        z.w1 = a.zeta[3];
        z.w2 = a.zeta[4];
        z.x1 = a.zeta[5];
        z.x2 = a.zeta[6];
        z.xt1 = a.zeta[7];
        z.xt2 = a.zeta[8];
        try {
            j["identification_constant"] = identification_constant(z);
        } catch (const std::invalid_argument& e) {
            throw CliError(2, e.what());
        }
    }

    if (!population && have_y) {
        const SlopeSignResult s = slope_sign_test(*sample, a.alpha);
        j["slope_sign"] = {{"slope", s.slope},
                           {"std_error", s.std_error},
                           {"t_stat", s.t_stat},
                           {"sign", s.sign},
                           {"reject_flat", s.reject_flat},
                           {"alpha", a.alpha}};
    }

    write_text_file(a.output, j.dump(2) + "\n", out);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Shape-constrained nonparametric IV estimation toolkit"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand(
        "fit", "Fit the NPIV estimator (optionally monotonicity-constrained)");
    fit_cmd->add_option("--input", fit_args.input, "CSV with header y,x,w")->required();
    fit_cmd->add_option("--output", fit_args.output, "JSON output path (- = stdout)");
    fit_cmd->add_flag("--constrained", fit_args.constrained,
                      "impose a nondecreasing fit");
    fit_cmd->add_option("--degree-x", fit_args.degree_x, "regressor spline degree");
    fit_cmd->add_option("--degree-w", fit_args.degree_w, "instrument spline degree");
    fit_cmd->add_option("--kx-knots", fit_args.kx_knots, "interior knots for x basis");
    fit_cmd->add_option("--kw-knots", fit_args.kw_knots, "interior knots for w basis");
    fit_cmd->add_option("--grid", fit_args.grid, "prediction grid size")
        ->check(CLI::Range(2, 100000));
    fit_cmd->add_option("--constraint-grid", fit_args.constraint_grid,
                        "derivative constraint grid size");
    fit_cmd->add_option("--rescale", fit_args.rescale, "minmax|ecdf");
    fit_cmd->add_option("--norm-bound", fit_args.norm_bound,
                        "coefficient norm bound C_b (0 = off)");

    TestArgs test_args;
    auto* test_cmd = app.add_subcommand(
        "test-miv", "Adaptive bootstrap test of the monotone-instrument condition");
    test_cmd->add_option("--input", test_args.input, "CSV with columns x,w")->required();
    test_cmd->add_option("--output", test_args.output, "JSON output path");
    test_cmd->add_option("--alpha", test_args.alpha, "test level");
    test_cmd->add_option("--boot", test_args.boot, "bootstrap replications");
    test_cmd->add_option("--seed", test_args.seed, "RNG seed")->required();
    test_cmd->add_option("--u", test_args.u, "bandwidth lattice ratio");
    test_cmd->add_option("--epsilon", test_args.epsilon, "x grid trimming");
    test_cmd->add_option("--h-min", test_args.h_min, "smallest bandwidth (0 = auto)");
    test_cmd->add_option("--cdf-bandwidth", test_args.cdf_bandwidth,
                         "conditional CDF bandwidth");
    test_cmd->add_option("--rescale", test_args.rescale, "minmax|ecdf");
    test_cmd->add_option("--threads", test_args.threads, "bootstrap threads (0 = auto)");

    McArgs mc_args;
    auto* mc_cmd =
        app.add_subcommand("mc", "Monte Carlo study of both estimators");
    mc_cmd->add_option("--model", mc_args.model, "1 or 2")->required();
    mc_cmd->add_option("--output", mc_args.output, "table CSV path");
    mc_cmd->add_option("--plot-output", mc_args.plot_output,
                       "pointwise mean/envelope CSV path");
    mc_cmd->add_option("--reps", mc_args.reps, "replications");
    mc_cmd->add_option("--n", mc_args.n, "sample size");
    mc_cmd->add_option("--sigma", mc_args.sigma, "noise level(s)");
    mc_cmd->add_option("--kx", mc_args.kx,
                       "knots for the x basis incl. boundary knots (list)");
    mc_cmd->add_option("--kw", mc_args.kw,
                       "knots for the w basis incl. boundary knots (list)");
    mc_cmd->add_option("--kappa", mc_args.kappa, "slope scale(s)");
    mc_cmd->add_option("--rho", mc_args.rho, "first-stage strength");
    mc_cmd->add_option("--eta", mc_args.eta, "endogeneity");
    mc_cmd->add_option("--degree-x", mc_args.degree_x, "regressor spline degree");
    mc_cmd->add_option("--degree-w", mc_args.degree_w, "instrument spline degree");
    mc_cmd->add_option("--grid", mc_args.grid, "evaluation grid size");
    mc_cmd->add_option("--constraint-grid", mc_args.constraint_grid,
                       "derivative constraint grid size");
    mc_cmd->add_option("--seed", mc_args.seed, "RNG seed")->required();
    mc_cmd->add_option("--threads", mc_args.threads, "replication threads (0 = auto)");

    DiagnoseArgs diag_args;
    auto* diag_cmd = app.add_subcommand(
        "diagnose", "Ill-posedness measures, identification constant, slope sign");
    diag_cmd->add_option("--input", diag_args.input, "CSV (empirical mode)");
    diag_cmd->add_option("--output", diag_args.output, "JSON output path");
    diag_cmd->add_option("--design", diag_args.design,
                         "`normal` for the Gaussian-copula population design");
    diag_cmd->add_option("--rho", diag_args.rho, "design correlation");
    diag_cmd->add_option("--K", diag_args.K, "sieve dimensions (list)");
    diag_cmd->add_option("--a", diag_args.a_list,
                         "slope bounds for restricted tau (numbers or `inf`)");
    diag_cmd->add_option("--trunc", diag_args.trunc, "truncation interval lo hi")
        ->expected(2);
    diag_cmd->add_option("--zeta", diag_args.zeta,
                         "c_f c_w C_F w1 w2 x1 x2 xt1 xt2 for the identification bound")
        ->expected(9);
    diag_cmd->add_option("--degree-x", diag_args.degree_x, "regressor spline degree");
    diag_cmd->add_option("--degree-w", diag_args.degree_w, "instrument spline degree");
    diag_cmd->add_option("--alpha", diag_args.alpha, "slope-sign test level");
    diag_cmd->add_option("--rescale", diag_args.rescale, "minmax|ecdf");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_args, out);
        if (test_cmd->parsed()) return cmd_test_miv(test_args, out);
        if (mc_cmd->parsed()) return cmd_mc(mc_args, out);
        if (diag_cmd->parsed()) return cmd_diagnose(diag_args, out);
        err << "no subcommand given\n";
        return 2;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace mnpiv
