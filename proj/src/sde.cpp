#include "tcsde/sde.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "tcsde/errors.hpp"

namespace tcsde {

std::vector<double> SdeSystem::eval_drift(std::span<const double> x) const {
    std::vector<double> out(d);
    drift(x, out);
    return out;
}

std::vector<double> SdeSystem::eval_diffusion(std::span<const double> x) const {
    std::vector<double> out(d * m);
    diffusion(x, out);
    return out;
}

SdeSystem builtin_paper_example() {
    SdeSystem sys;
    sys.name = "paper2d";
    sys.d = 2;
    sys.m = 2;
    sys.drift = [](std::span<const double> x, std::span<double> out) {
        const double s = x[0] + x[1];
        out[0] = -s;
        out[1] = -2.0 * s;
    };
    sys.diffusion = [](std::span<const double> x, std::span<double> out) {
        const double s = x[0] + x[1];
        out[0] = 2.0 * s;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = s;
    };
    sys.initial_state = {1.0, 2.0};
    // |f(x)-f(y)| + |g(x)-g(y)|_F = 2 sqrt(5) |s_x - s_y| <= 2 sqrt(10) |x-y| < 3 sqrt(5) |x-y|.
    sys.lipschitz_constant = 3.0 * std::sqrt(5.0);
    return sys;
}

SdeSystem builtin_exponential_decay(double lambda) {
    SdeSystem sys;
    sys.name = "expdecay";
    sys.drift = [lambda](std::span<const double> x, std::span<double> out) { out[0] = -lambda * x[0]; };
    sys.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    sys.initial_state = {1.0};
    sys.oracle = [lambda](double e_terminal, std::span<const double>) {
        return std::vector<double>{std::exp(-lambda * e_terminal)};
    };
    sys.lipschitz_constant = std::abs(lambda);
    sys.params = {{"lambda", lambda}};
    return sys;
}

SdeSystem builtin_geometric(double mu, double sigma) {
    SdeSystem sys;
    sys.name = "geometric";
    sys.drift = [mu](std::span<const double> x, std::span<double> out) { out[0] = mu * x[0]; };
    sys.diffusion = [sigma](std::span<const double> x, std::span<double> out) { out[0] = sigma * x[0]; };
    sys.initial_state = {1.0};
    sys.oracle = [mu, sigma](double e_terminal, std::span<const double> b_terminal) {
        return std::vector<double>{std::exp((mu - 0.5 * sigma * sigma) * e_terminal + sigma * b_terminal[0])};
    };
    sys.lipschitz_constant = std::abs(mu) + std::abs(sigma);
    sys.params = {{"mu", mu}, {"sigma", sigma}};
    return sys;
}

namespace {

void require_keys(const std::map<std::string, double>& params, const std::set<std::string>& allowed,
                  const std::string& system) {
    for (const auto& [key, value] : params) {
        if (!allowed.contains(key)) throw ConfigError("unknown parameter '" + key + "' for system " + system);
        if (!std::isfinite(value)) throw ConfigError("parameter '" + key + "' must be finite");
    }
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace

SdeSystem make_builtin(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "paper2d") {
        require_keys(params, {}, name);
        return builtin_paper_example();
    }
    if (name == "expdecay") {
        require_keys(params, {"lambda"}, name);
        return builtin_exponential_decay(param_or(params, "lambda", 1.0));
    }
    if (name == "geometric") {
        require_keys(params, {"mu", "sigma"}, name);
        return builtin_geometric(param_or(params, "mu", 0.5), param_or(params, "sigma", 0.5));
    }
    throw ConfigError("unknown system '" + name + "' (expected paper2d, expdecay or geometric)");
}

std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("malformed parameter '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string raw = item.substr(eq + 1);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(raw, &used);
        } catch (const std::exception&) {
            throw ConfigError("parameter '" + key + "' is not a number");
        }
        if (used != raw.size()) throw ConfigError("parameter '" + key + "' is not a number");
        out[key] = value;
    }
    return out;
}

}  // namespace tcsde
