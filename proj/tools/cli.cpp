#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "svt/completion.hpp"
#include "svt/decomp.hpp"
#include "svt/matrix_market.hpp"
#include "svt/metrics.hpp"

namespace svt::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitSoftware = 70;

// Solver options shared by svt and svt-compress.
struct DriverFlags {
    double tol = kSqrtEps;
    std::size_t k = 6;
    std::size_t incre = 5;
    std::optional<std::size_t> kmax;
    std::optional<std::size_t> psvdmax;
    std::size_t pwrsvd = 0;
    std::uint64_t seed = 20240501;
    std::size_t max_restarts = 1000;
    bool display = false;
    std::optional<std::string> warm_start;

    void add(CLI::App& app) {
        app.add_option("--tol", tol, "Convergence tolerance")->capture_default_str();
        app.add_option("--k", k, "Initial number of triplets per psvd call")->capture_default_str();
        app.add_option("--incre", incre, "Initial increment of k")->capture_default_str();
        app.add_option("--kmax", kmax, "Largest k passed to psvd");
        app.add_option("--psvdmax", psvdmax, "Largest output size");
        app.add_option("--pwrsvd", pwrsvd, "Block power steps forced on every iteration")->capture_default_str();
        app.add_option("--seed", seed, "Random seed")->capture_default_str();
        app.add_option("--max-restarts", max_restarts, "Factorization builds per psvd call")->capture_default_str();
        app.add_flag("--display", display, "Per-iteration diagnostics on stderr");
        app.add_option("--warm-start", warm_start, "Directory holding a previous U.mtx, S.txt, V.mtx");
    }

    SvtOptions options(std::ostream& err) const {
        SvtOptions o;
        o.tol = tol;
        o.k = k;
        o.incre = incre;
        o.kmax = kmax;
        o.psvdmax = psvdmax;
        o.pwrsvd = pwrsvd;
        o.seed = seed;
        o.max_restarts = max_restarts;
        o.display = display;
        o.log = &err;
        if (warm_start) o.warm_start = load_psvd(*warm_start);
        return o;
    }
};

int parse_failure(const CLI::App& app, const CLI::ParseError& e, std::ostream& out, std::ostream& err) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
}

// Maps exceptions to exit codes.
int guarded(std::ostream& err, const std::string& name, const std::function<int()>& body) {
    try {
        return body();
    } catch (const MatrixMarketError& e) {
        err << name << ": line " << e.line() << ": " << e.what() << '\n';
        return kExitDataErr;
    } catch (const fs::filesystem_error& e) {
        err << name << ": " << e.what() << '\n';
        return kExitIoErr;
    } catch (const std::ios_base::failure& e) {
        err << name << ": " << e.what() << '\n';
        return kExitIoErr;
    } catch (const std::invalid_argument& e) {
        err << name << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << '\n';
        return kExitSoftware;
    }
}

bool is_array_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    return header.find(" array ") != std::string::npos;
}

Vector read_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    Vector s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r") + 1;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data() + first, line.data() + last, v);
        if (ec != std::errc() || ptr != line.data() + last)
            throw MatrixMarketError(lineno, "invalid value in " + path.filename().string());
        s.push_back(v);
    }
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_summary(const fs::path& dir, const json& summary, std::ostream& out) {
    fs::create_directories(dir);
    std::ofstream f(dir / "summary.json");
    if (!f) throw std::ios_base::failure("cannot write " + (dir / "summary.json").string());
    f << summary.dump(2) << '\n';
    if (!f) throw std::ios_base::failure("write failed: " + (dir / "summary.json").string());
    out << summary.dump() << '\n';
}

// Error measures of a partial SVD of `a`; an empty output has none.
void add_errors(json& summary, const LinearOperator& a, const PartialSvd& p) {
    summary["E_tot"] = p.size() > 0 ? total_residual(a, p.u, p.s, p.v) : 0.0;
    summary["UV_err"] = p.size() > 0 ? orthogonality_error(p.u, p.v) : 0.0;
}

}  // namespace

std::optional<PartialSvd> load_psvd(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::ios_base::failure("not a directory: " + dir.string());
    const fs::path u = dir / "U.mtx", s = dir / "S.txt", v = dir / "V.mtx";
    const int present = fs::exists(u) + fs::exists(s) + fs::exists(v);
    if (present == 0) return std::nullopt;
    if (present != 3) throw UsageError("warm start: " + dir.string() + " must hold all of U.mtx, S.txt, V.mtx");

    PartialSvd p;
    p.u = mm_read_dense(u);
    p.v = mm_read_dense(v);
    p.s = read_values(s);
    if (p.u.cols() != p.s.size() || p.v.cols() != p.s.size())
        throw UsageError("warm start: U.mtx, S.txt and V.mtx disagree on the number of triplets");
    return p;
}

void save_psvd(const fs::path& dir, const PartialSvd& p) {
    fs::create_directories(dir);
    mm_write_dense(dir / "U.mtx", p.u);
    mm_write_dense(dir / "V.mtx", p.v);
    std::ofstream f(dir / "S.txt");
    if (!f) throw std::ios_base::failure("cannot write " + (dir / "S.txt").string());
    for (double x : p.s) f << format_double(x) << '\n';
    if (!f) throw std::ios_base::failure("write failed: " + (dir / "S.txt").string());
}

int run_svt(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Singular triplets above a threshold of a Matrix Market matrix", "svt"};
    std::string input;
    std::optional<double> sigma, energy, fro_sq;
    std::string out_dir = "svt_out";
    std::string format = "matrix-market";
    DriverFlags flags;

    app.add_option("input", input, "Matrix Market file (coordinate or array)")->required();
    auto* sigma_opt = app.add_option("--sigma", sigma, "Keep singular values >= sigma");
    auto* energy_opt = app.add_option("--energy", energy, "Keep the shortest prefix holding this energy fraction");
    sigma_opt->excludes(energy_opt);
    app.add_option("--fro-norm-sq", fro_sq, "Squared Frobenius norm for energy mode");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", format, "Files to write")
        ->check(CLI::IsMember({"matrix-market", "summary-json"}))
        ->capture_default_str();
    flags.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return parse_failure(app, e, out, err);
    }

    return guarded(err, "svt", [&] {
        ThresholdSpec spec = sigma    ? ThresholdSpec::by_sigma(*sigma)
                             : energy ? ThresholdSpec::by_energy(*energy, fro_sq)
                                      : ThresholdSpec::top_k();
        spec.validate();
        SvtOptions opts = flags.options(err);
        SparseMatrix a = mm_read(input);

        auto t0 = std::chrono::steady_clock::now();
        PartialSvd p = svt_run(a, spec, opts);
        const double wall = seconds_since(t0);

        if (format == "matrix-market") save_psvd(out_dir, p);
        json summary;
        summary["flag"] = static_cast<int>(p.flag);
        summary["k"] = p.size();
        if (sigma) summary["sigma_or_energy"] = *sigma;
        else if (energy) summary["sigma_or_energy"] = *energy;
        else summary["sigma_or_energy"] = nullptr;
        add_errors(summary, SparseOperator(a), p);
        summary["wall_seconds"] = wall;
        summary["matvec_count"] = p.matvecs;
        write_summary(out_dir, summary, out);
        return static_cast<int>(p.flag);
    });
}

int run_svt_mc(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Matrix completion by singular value thresholding", "svt-mc"};
    std::string input;
    std::optional<std::string> truth;
    std::string out_dir = "svt_mc_out";
    SvtMcParams params;
    bool cold = false;

    app.add_option("input", input, "Observed entries (Matrix Market coordinate)")->required();
    app.add_option("--tau", params.tau, "Shrinkage threshold (default 5*sqrt(m*n))");
    app.add_option("--delta", params.delta, "Step size (default 1.2*m*n/|omega|)");
    app.add_option("--tol-outer", params.tol_outer, "Relative residual on the observed entries")
        ->capture_default_str();
    app.add_option("--max-outer", params.max_outer, "Iteration limit")->capture_default_str();
    app.add_option("--k0", params.k0, "Triplets requested per inner psvd call")->capture_default_str();
    app.add_option("--incre", params.ell_incre, "Increment of the inner request")->capture_default_str();
    app.add_option("--tol", params.psvd_tol, "Inner tolerance")->capture_default_str();
    app.add_option("--pwrsvd", params.pwrsvd, "Block power steps on each warm start")->capture_default_str();
    app.add_flag("--cold", cold, "Do not warm start the inner solves");
    app.add_option("--seed", params.seed, "Random seed")->capture_default_str();
    app.add_flag("--display", params.display, "Per-iteration diagnostics on stderr");
    app.add_option("--truth", truth, "Full matrix for reporting the recovery error");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return parse_failure(app, e, out, err);
    }
    params.warm_start = !cold;
    params.log = &err;

    return guarded(err, "svt-mc", [&]() -> int {
        SparseMatrix observed = mm_read(input);
        ObservedMatrix obs{observed.rows(), observed.cols(), observed.triplets()};
        std::optional<DenseMatrix> full;
        if (truth) {
            full = mm_read_dense(*truth);
            if (full->rows() != obs.m || full->cols() != obs.n)
                throw UsageError("--truth dimensions differ from the observed matrix");
        }

        auto t0 = std::chrono::steady_clock::now();
        CompletionResult r;
        try {
            r = svt_mc_complete(obs, params);
        } catch (const DivergenceError& e) {
            err << "svt-mc: " << e.what() << '\n';
            return 1;
        }
        const double wall = seconds_since(t0);

        PartialSvd p;
        p.u = r.u;
        p.s = r.s;
        p.v = r.v;
        save_psvd(out_dir, p);

        json summary;
        summary["flag"] = r.converged ? 0 : 2;
        summary["converged"] = r.converged;
        summary["k"] = r.rank();
        summary["iterations"] = r.iterations;
        summary["residual"] = r.residual;
        summary["tau"] = r.tau;
        summary["delta"] = r.delta;
        if (full) {
            const double norm = frobenius_norm(*full);
            const double diff = reconstruction_error(*full, r.u, r.s, r.v);
            summary["recovery_error"] = norm > 0.0 ? diff / norm : diff;
        }
        summary["UV_err"] = r.rank() > 0 ? orthogonality_error(r.u, r.v) : 0.0;
        summary["wall_seconds"] = wall;
        summary["matvec_count"] = r.matvecs;
        write_summary(out_dir, summary, out);
        return r.converged ? 0 : 2;
    });
}

int run_svt_compress(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank compression to an energy level", "svt-compress"};
    std::string input;
    double energy = 0.0;
    std::string out_dir = "svt_compress_out";
    DriverFlags flags;

    app.add_option("input", input, "Matrix Market file (array input also reports the direct error)")->required();
    app.add_option("--energy", energy, "Energy fraction to retain, in (0, 1]")->required();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    flags.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return parse_failure(app, e, out, err);
    }

    return guarded(err, "svt-compress", [&] {
        ThresholdSpec::by_energy(energy).validate();
        SvtOptions opts = flags.options(err);

        auto t0 = std::chrono::steady_clock::now();
        CompressionResult c;
        SparseMatrix a;
        if (is_array_file(input)) {
            DenseMatrix d = mm_read_dense(input);
            c = compress_energy(d, energy, opts);
            a = SparseMatrix::from_dense(d);
        } else {
            a = mm_read(input);
            c = compress_energy(a, energy, opts);
        }
        const double wall = seconds_since(t0);

        save_psvd(out_dir, c.psvd);
        json summary;
        summary["flag"] = static_cast<int>(c.psvd.flag);
        summary["k"] = c.k();
        summary["sigma_or_energy"] = energy;
        summary["energy"] = c.energy;
        summary["nrmse"] = c.nrmse;
        if (c.direct_nrmse) summary["direct_nrmse"] = *c.direct_nrmse;
        add_errors(summary, SparseOperator(a), c.psvd);
        summary["wall_seconds"] = wall;
        summary["matvec_count"] = c.psvd.matvecs;
        write_summary(out_dir, summary, out);
        return static_cast<int>(c.psvd.flag);
    });
}

}  // namespace svt::cli
