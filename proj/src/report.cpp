#include "tcsde/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tcsde/errors.hpp"

namespace tcsde {

namespace fs = std::filesystem;

std::string format_double(double value) {
    // Shortest representation that round-trips.
    std::array<char, 32> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), result.ptr);
}

void write_comment_header(std::ostream& out, const ConfigEcho& echo) {
    out << "# schema_version=" << kSchemaVersion << '\n';
    out << "# tool_version=" << kToolVersion << '\n';
    for (const auto& [key, value] : echo) out << "# " << key << '=' << value << '\n';
}

nlohmann::json report_to_json(const ConvergenceReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"factor", e.factor}, {"dt", e.dt}, {"error", e.error}, {"std_error", e.std_error}});
    }
    return {
        {"system", report.system},
        {"alpha", report.alpha},
        {"drift", report.drift},
        {"T", report.horizon},
        {"dt_ref", report.dt_ref},
        {"M", report.samples},
        {"seed", report.master_seed},
        {"out_of_theory", report.out_of_theory},
        {"entries", entries},
        {"fitted_rate", report.fit.slope},
        {"fit_intercept", report.fit.intercept},
        {"r_squared", report.fit.r_squared},
        {"theoretical_rate", report.theoretical_rate},
    };
}

ConvergenceReport report_from_json(const nlohmann::json& j) {
    ConvergenceReport r;
    r.system = j.at("system").get<std::string>();
    r.alpha = j.at("alpha").get<double>();
    r.drift = j.at("drift").get<double>();
    r.horizon = j.at("T").get<double>();
    r.dt_ref = j.at("dt_ref").get<double>();
    r.samples = j.at("M").get<std::size_t>();
    r.master_seed = j.at("seed").get<std::uint64_t>();
    r.out_of_theory = j.at("out_of_theory").get<bool>();
    for (const auto& e : j.at("entries")) {
        r.entries.push_back({e.at("factor").get<std::size_t>(), e.at("dt").get<double>(), e.at("error").get<double>(),
                             e.at("std_error").get<double>()});
    }
    r.fit = {j.at("fitted_rate").get<double>(), j.at("fit_intercept").get<double>(), j.at("r_squared").get<double>()};
    r.theoretical_rate = j.at("theoretical_rate").get<double>();
    return r;
}

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

std::vector<fs::path> write_convergence_outputs(const fs::path& dir, const std::vector<ConvergenceReport>& reports,
                                                const ConfigEcho& echo) {
    fs::create_directories(dir);
    std::vector<fs::path> written;

    {
        nlohmann::json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["tool_version"] = kToolVersion;
        nlohmann::json config = nlohmann::json::object();
        for (const auto& [key, value] : echo) config[key] = value;
        doc["config"] = config;
        doc["reports"] = nlohmann::json::array();
        for (const auto& r : reports) doc["reports"].push_back(report_to_json(r));
        const fs::path path = dir / "report.json";
        open_output(path) << doc.dump(2) << '\n';
        written.push_back(path);
    }
    {
        const fs::path path = dir / "errors.csv";
        auto out = open_output(path);
        write_comment_header(out, echo);
        out << "alpha,dt,error,stderr\n";
        for (const auto& r : reports) {
            for (const auto& e : r.entries) {
                out << format_double(r.alpha) << ',' << format_double(e.dt) << ',' << format_double(e.error) << ','
                    << format_double(e.std_error) << '\n';
            }
        }
        written.push_back(path);
    }
    {
        const fs::path path = dir / "rates.csv";
        auto out = open_output(path);
        write_comment_header(out, echo);
        out << "alpha,theoretical,fitted,r2\n";
        for (const auto& r : reports) {
            out << format_double(r.alpha) << ',' << format_double(r.theoretical_rate) << ','
                << format_double(r.fit.slope) << ',' << format_double(r.fit.r_squared) << '\n';
        }
        written.push_back(path);
    }
    {
        const fs::path path = dir / "loglog.dat";
        auto out = open_output(path);
        write_comment_header(out, echo);
        bool first = true;
        for (const auto& r : reports) {
            if (!first) out << "\n\n";
            first = false;
            out << "# alpha=" << format_double(r.alpha) << " drift=" << format_double(r.drift)
                << " theoretical_rate=" << format_double(r.theoretical_rate)
                << " fitted_rate=" << format_double(r.fit.slope) << '\n';
            out << "# log2_dt log2_err fit\n";
            for (const auto& e : r.entries) {
                const double x = std::log2(e.dt);
                out << format_double(x) << ' ' << format_double(std::log2(e.error)) << ' '
                    << format_double(r.fit.intercept + r.fit.slope * x) << '\n';
            }
        }
        written.push_back(path);
    }
    return written;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx, digest.data(), &length);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : manifest.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return {
        {"schema_version", kSchemaVersion},
        {"tool_version", manifest.tool_version},
        {"config", manifest.config},
        {"seed", manifest.master_seed},
        {"wall_seconds", manifest.wall_seconds},
        {"files", files},
    };
}

namespace {

std::string join(const std::vector<double>& values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) out += ';';
        out += format_double(v);
    }
    return out;
}

}  // namespace

RunManifest repro(const ReproOptions& options, std::ostream* log) {
    const auto start = std::chrono::steady_clock::now();
    const ProfileDefaults defaults = profile_defaults(options.profile);
    const double dt_ref = options.dt_ref.value_or(defaults.dt_ref);
    const std::size_t samples = options.samples.value_or(defaults.samples);

    RunManifest manifest;
    manifest.master_seed = options.master_seed;
    manifest.config = {
        {"profile", to_string(options.profile)},
        {"system", "paper2d"},
        {"T", 1.0},
        {"dt_ref", dt_ref},
        {"ladder", {8, 16, 32, 64}},
        {"M", samples},
        {"seed", options.master_seed},
        {"table_alphas", options.table_alphas},
        {"drift_alphas", options.drift_alphas},
        {"drift", options.drift},
    };

    fs::create_directories(options.out_dir);
    std::vector<fs::path> written;
    try {
        const auto run_group = [&](const std::string& subdir, const std::vector<double>& alphas, double drift) {
            std::vector<ConvergenceReport> reports;
            for (double alpha : alphas) {
                ConvergenceConfig config;
                config.system = builtin_paper_example();
                config.spec = {alpha, drift, dt_ref};
                config.dt_ref = dt_ref;
                config.samples = samples;
                config.master_seed = options.master_seed;
                config.threads = options.threads;
                const auto t0 = std::chrono::steady_clock::now();
                reports.push_back(run_convergence_study(config));
                if (log != nullptr) {
                    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    *log << "[repro] " << subdir << " alpha=" << alpha << " drift=" << drift
                         << " fitted=" << std::fixed << std::setprecision(4) << reports.back().fit.slope
                         << " theoretical=" << reports.back().theoretical_rate << " (" << std::setprecision(1)
                         << secs << " s)" << std::defaultfloat << std::endl;
                }
            }
            const ConfigEcho echo = {
                {"command", "repro"},
                {"profile", to_string(options.profile)},
                {"system", "paper2d"},
                {"alphas", join(alphas)},
                {"drift", format_double(drift)},
                {"T", "1"},
                {"dt_ref", format_double(dt_ref)},
                {"ladder", "8;16;32;64"},
                {"M", std::to_string(samples)},
                {"seed", std::to_string(options.master_seed)},
            };
            for (auto& p : write_convergence_outputs(options.out_dir / subdir, reports, echo)) written.push_back(p);
        };
        run_group("table1", options.table_alphas, 0.0);
        run_group("drift", options.drift_alphas, options.drift);
    } catch (...) {
        std::error_code ignored;
        for (const auto& p : written) fs::remove(p, ignored);
        fs::remove(options.out_dir / "table1", ignored);
        fs::remove(options.out_dir / "drift", ignored);
        throw;
    }

    for (const auto& p : written) {
        manifest.files.push_back({fs::relative(p, options.out_dir).generic_string(), sha256_file(p)});
    }
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    open_output(options.out_dir / "manifest.json") << manifest_to_json(manifest).dump(2) << '\n';
    return manifest;
}

}  // namespace tcsde
