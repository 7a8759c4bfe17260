// siclad: DBSCAN anomaly detection with selective p-values.
//
// Exit codes: 0 success, 2 ingestion error, 3 usage error, 4 numerical/invariant failure.

#include "siclad/csv.hpp"
#include "siclad/io.hpp"
#include "siclad/siclad.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_ingest = 2;
constexpr int exit_usage = 3;
constexpr int exit_numerical = 4;

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct common_flags {
    std::string input;
    bool header = false;
    double eps = 0.0;
    std::size_t min_pts = 0;
    std::string output = "json";
    std::string out;
};

struct covariance_flags {
    std::optional<double> sigma2;
    std::optional<double> rho;
    std::string cov_file;
};

struct inference_flags {
    double alpha = 0.05;
    std::vector<std::string> methods{"selective"};
    double z_span = 20.0;
    double delta_step = 0.001;
    std::size_t threads = 0;
};

struct experiment_flags {
    std::string mode;
    std::vector<double> n{100};
    std::vector<double> d{1};
    std::vector<double> delta;
    std::vector<double> rho;
    std::optional<double> sigma2;
    std::optional<std::size_t> anomaly_count;
    std::size_t trials = 500;
    double eps = 0.2;
    std::size_t min_pts = 5;
    std::uint64_t seed = 0;
    std::string raw;
};

siclad::data_matrix read_input(const common_flags& f) {
    if (f.input == "-") return siclad::load_observations(std::cin, f.header);
    std::ifstream in(f.input);
    if (!in) throw siclad::ingest_error("cannot open input file '" + f.input + "'");
    return siclad::load_observations(in, f.header);
}

/// Writes to --out when given, stdout otherwise.
class output_sink {
public:
    explicit output_sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw usage_error("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

siclad::covariance_model make_covariance(const covariance_flags& f, std::size_t n, std::size_t d) {
    const int given = (f.sigma2 ? 1 : 0) + (f.rho ? 1 : 0) + (f.cov_file.empty() ? 0 : 1);
    if (given != 1) throw usage_error("exactly one of --sigma2, --rho, --cov-file is required");
    try {
        if (f.sigma2) return siclad::build_covariance(siclad::covariance_request::scalar(*f.sigma2), n, d);
        if (f.rho) return siclad::build_covariance(siclad::covariance_request::ar1(*f.rho), n, d);
    } catch (const siclad::invalid_argument& e) {
        throw usage_error(e.what());
    }
    std::ifstream in(f.cov_file);
    if (!in) throw siclad::ingest_error("cannot open covariance file '" + f.cov_file + "'");
    auto m = siclad::load_square_matrix(in);
    try {
        return siclad::build_covariance(siclad::covariance_request::explicit_matrix(std::move(m)), n, d);
    } catch (const siclad::invalid_argument& e) {
        throw siclad::ingest_error(std::string("covariance file: ") + e.what());
    }
}

std::vector<siclad::method> parse_methods(const std::vector<std::string>& names) {
    std::vector<siclad::method> out;
    for (const auto& s : names) {
        try {
            out.push_back(siclad::parse_method(s));
        } catch (const siclad::invalid_argument& e) {
            throw usage_error(e.what());
        }
    }
    if (out.empty()) throw usage_error("--methods must name at least one method");
    return out;
}

siclad::dbscan_params make_params(double eps, std::size_t min_pts) {
    siclad::dbscan_params p{eps, min_pts};
    try {
        p.validate();
    } catch (const siclad::invalid_argument& e) {
        throw usage_error(e.what());
    }
    return p;
}

int cmd_detect(const common_flags& f) {
    const auto params = make_params(f.eps, f.min_pts);
    const auto x = read_input(f);
    const auto det = siclad::detect_anomalies(x, params);
    output_sink sink(f.out);
    if (f.output == "csv") {
        siclad::io::write_detection_csv(sink.stream(), det);
    } else {
        sink.stream() << siclad::io::detection_json(det, x.rows(), x.cols(), params).dump(2) << '\n';
    }
    return exit_ok;
}

int cmd_test(const common_flags& f, const covariance_flags& cf, const inference_flags& inf) {
    const auto params = make_params(f.eps, f.min_pts);
    if (!(inf.alpha > 0.0 && inf.alpha < 1.0)) throw usage_error("--alpha must lie in (0, 1)");
    if (!(inf.z_span > 0.0)) throw usage_error("--z-span must be positive");
    if (!(inf.delta_step > 0.0)) throw usage_error("--delta-step must be positive");
    siclad::siclad_options opt;
    opt.methods = parse_methods(inf.methods);
    opt.alpha = inf.alpha;
    opt.search.span_sd = inf.z_span;
    opt.search.delta = inf.delta_step;
    opt.threads = inf.threads;

    const auto x = read_input(f);
    const auto cov = make_covariance(cf, x.rows(), x.cols());
    const auto report = siclad::si_clad(x, cov, params, opt);
    output_sink sink(f.out);
    if (f.output == "csv") {
        siclad::io::write_report_csv(sink.stream(), report);
    } else {
        sink.stream() << siclad::io::report_json(report).dump(2) << '\n';
    }
    return exit_ok;
}

/// Picks the swept parameter: the only list with more than one value, or n by default.
siclad::sweep_spec pick_sweep(const experiment_flags& e, bool bench_only) {
    std::vector<std::pair<std::string, const std::vector<double>*>> lists{
        {"n", &e.n}, {"d", &e.d}, {"delta", &e.delta}, {"rho", &e.rho}};
    siclad::sweep_spec sweep;
    for (const auto& [name, values] : lists) {
        if (values->size() <= 1) continue;
        if (!sweep.param.empty()) throw usage_error("only one of --n, --d, --delta, --rho may list several values");
        sweep = {name, *values};
    }
    if (bench_only) {
        if (sweep.param.empty()) sweep = {"n", e.n};
        if (sweep.param != "n" && sweep.param != "d") throw usage_error("bench sweeps over --n or --d");
    } else if (sweep.param.empty()) {
        sweep = {"n", {e.n.front()}};
    }
    return sweep;
}

siclad::experiment_config make_experiment_config(const experiment_flags& e, const inference_flags& inf,
                                                 double default_delta) {
    siclad::experiment_config cfg;
    auto as_count = [](double v, const char* name) {
        if (v < 1 || v != std::floor(v)) throw usage_error(std::string("--") + name + " values must be positive integers");
        return static_cast<std::size_t>(v);
    };
    cfg.n = as_count(e.n.front(), "n");
    cfg.d = as_count(e.d.front(), "d");
    cfg.delta = e.delta.empty() ? default_delta : e.delta.front();
    cfg.anomaly_count = e.anomaly_count;
    const double sigma2 = e.sigma2.value_or(1.0);
    cfg.cov = e.rho.empty() ? siclad::covariance_request::scalar(sigma2) : siclad::covariance_request::ar1(e.rho.front(), sigma2);
    cfg.params = make_params(e.eps, e.min_pts);
    cfg.trials = e.trials;
    cfg.alpha = inf.alpha;
    cfg.seed = e.seed;
    cfg.methods = parse_methods(inf.methods);
    cfg.search.span_sd = inf.z_span;
    cfg.search.delta = inf.delta_step;
    cfg.threads = inf.threads;
    return cfg;
}

int cmd_experiment(const experiment_flags& e, const inference_flags& inf, const std::string& out) {
    const auto mode = e.mode == "fpr" ? siclad::rate_mode::fpr : siclad::rate_mode::tpr;
    const auto cfg = make_experiment_config(e, inf, mode == siclad::rate_mode::fpr ? 0.0 : 4.0);
    const auto sweep = pick_sweep(e, false);
    siclad::rate_experiment_result res;
    try {
        for (double v : sweep.values) siclad::apply_sweep_value(cfg, sweep.param, v).validate();
        res = siclad::run_rate_sweep(cfg, mode, sweep);
    } catch (const siclad::invalid_argument& err) {
        throw usage_error(err.what());
    }
    output_sink sink(out);
    siclad::io::write_rate_csv(sink.stream(), res.rows);
    if (!e.raw.empty()) {
        output_sink raw(e.raw);
        siclad::io::write_records_csv(raw.stream(), res.records, cfg.methods);
    }
    return exit_ok;
}

int cmd_bench(const experiment_flags& e, const inference_flags& inf, const std::string& out) {
    auto cfg = make_experiment_config(e, inf, 0.0);
    const auto sweep = pick_sweep(e, true);
    std::vector<siclad::bench_row> rows;
    try {
        for (double v : sweep.values) siclad::apply_sweep_value(cfg, sweep.param, v).validate();
        rows = siclad::bench(cfg, sweep);
    } catch (const siclad::invalid_argument& err) {
        throw usage_error(err.what());
    }
    output_sink sink(out);
    siclad::io::write_bench_csv(sink.stream(), rows);
    return exit_ok;
}

void add_common(CLI::App* cmd, common_flags& f) {
    cmd->add_option("--input,-i", f.input, "observations CSV ('-' for stdin)")->required();
    cmd->add_flag("--header", f.header, "skip the first row");
    cmd->add_option("--eps", f.eps, "neighborhood radius")->required();
    cmd->add_option("--min-pts", f.min_pts, "minimum neighborhood size for a core point")->required();
    cmd->add_option("--output", f.output, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out,-o", f.out, "write to this file instead of stdout");
}

void add_inference(CLI::App* cmd, inference_flags& inf) {
    cmd->add_option("--alpha", inf.alpha, "significance level")->capture_default_str();
    cmd->add_option("--methods", inf.methods, "selective,oc,naive,bonferroni")->delimiter(',');
    cmd->add_option("--z-span", inf.z_span, "search half-width in standard deviations")->capture_default_str();
    cmd->add_option("--delta-step", inf.delta_step, "line-search step past each interval")->capture_default_str();
    cmd->add_option("--threads", inf.threads, "worker threads (default: SICLAD_THREADS or hardware)");
}

void add_experiment(CLI::App* cmd, experiment_flags& e, std::string& out) {
    cmd->add_option("--n", e.n, "sample sizes")->delimiter(',');
    cmd->add_option("--d", e.d, "dimensions")->delimiter(',');
    cmd->add_option("--delta", e.delta, "mean shifts of the anomalous rows")->delimiter(',');
    cmd->add_option("--rho", e.rho, "AR(1) feature correlations")->delimiter(',');
    cmd->add_option("--sigma2", e.sigma2, "noise variance (default 1)");
    cmd->add_option("--anomaly-count", e.anomaly_count, "shifted rows per trial (default floor(n/3))");
    cmd->add_option("--trials", e.trials, "Monte Carlo repetitions")->capture_default_str();
    cmd->add_option("--eps", e.eps, "neighborhood radius")->capture_default_str();
    cmd->add_option("--min-pts", e.min_pts, "minimum neighborhood size")->capture_default_str();
    cmd->add_option("--seed", e.seed, "base seed")->capture_default_str();
    cmd->add_option("--out,-o", out, "CSV destination (default stdout)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DBSCAN anomaly detection with selective-inference p-values"};
    app.require_subcommand(1);

    common_flags common;
    covariance_flags cov;
    inference_flags test_inf;
    experiment_flags exp;
    inference_flags exp_inf;
    exp_inf.methods = {"selective", "oc", "naive", "bonferroni"};
    std::string exp_out;
    experiment_flags bench_exp;
    bench_exp.trials = 20;
    inference_flags bench_inf;
    std::string bench_out;

    auto* detect = app.add_subcommand("detect", "run DBSCAN and list the anomalies");
    add_common(detect, common);

    auto* test = app.add_subcommand("test", "detect anomalies and compute p-values for each");
    add_common(test, common);
    add_inference(test, test_inf);
    test->add_option("--sigma2", cov.sigma2, "Sigma = sigma2 * I");
    test->add_option("--rho", cov.rho, "Sigma = Xi kron I_n with Xi = [rho^|k-l|]");
    test->add_option("--cov-file", cov.cov_file, "explicit (n*d)x(n*d) covariance CSV of vec(X)");

    auto* experiment = app.add_subcommand("experiment", "Monte Carlo FPR / TPR study on synthetic data");
    experiment->add_option("mode", exp.mode, "fpr or tpr")->required()->check(CLI::IsMember({"fpr", "tpr"}));
    add_experiment(experiment, exp, exp_out);
    add_inference(experiment, exp_inf);
    experiment->add_option("--raw", exp.raw, "per-hypothesis CSV destination");

    auto* bench = app.add_subcommand("bench", "time per selective p-value across n or d");
    add_experiment(bench, bench_exp, bench_out);
    add_inference(bench, bench_inf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*detect) return cmd_detect(common);
        if (*test) return cmd_test(common, cov, test_inf);
        if (*experiment) return cmd_experiment(exp, exp_inf, exp_out);
        if (*bench) return cmd_bench(bench_exp, bench_inf, bench_out);
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n' << app.help();
        return exit_usage;
    } catch (const siclad::ingest_error& e) {
        std::cerr << "ingestion error: " << e.what() << '\n';
        return exit_ingest;
    } catch (const siclad::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const siclad::error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_usage;
}
