#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcsde {

/**
 * Autonomous time-changed SDE  dX = f(X) dE(t) + g(X) dB(E(t)).
 *
 * drift writes f(x) (length d) into `out`; diffusion writes g(x) as a dense
 * row-major d x m matrix. Both must be re-entrant.
 */
struct SdeSystem {
    using Drift = std::function<void(std::span<const double> x, std::span<double> out)>;
    using Diffusion = std::function<void(std::span<const double> x, std::span<double> out)>;
    /// Closed-form X(T) from E(T) and B(E(T)).
    using Oracle = std::function<std::vector<double>(double e_terminal, std::span<const double> b_terminal)>;

    std::string name;
    std::size_t d = 1;
    std::size_t m = 1;
    Drift drift;
    Diffusion diffusion;
    std::vector<double> initial_state;
    std::optional<Oracle> oracle;
    /// Lipschitz constant when known; test metadata only.
    std::optional<double> lipschitz_constant;
    /// Resolved builtin parameters, echoed into outputs.
    std::map<std::string, double> params;

    std::vector<double> eval_drift(std::span<const double> x) const;
    std::vector<double> eval_diffusion(std::span<const double> x) const;
};

/// dX1 = -(X1+X2) dE + 2(X1+X2) dB1(E), dX2 = -2(X1+X2) dE + (X1+X2) dB2(E),
/// X(0) = (1, 2).
SdeSystem builtin_paper_example();

/// dX = -lambda X dE, X(0) = 1; X(T) = exp(-lambda E(T)).
SdeSystem builtin_exponential_decay(double lambda);

/// dX = mu X dE + sigma X dB(E), X(0) = 1;
/// X(T) = exp((mu - sigma^2/2) E(T) + sigma B(E(T))).
SdeSystem builtin_geometric(double mu, double sigma);

/// Looks up "paper2d", "expdecay" (lambda, default 1) or "geometric"
/// (mu, sigma; defaults 0.5, 0.5). Unknown names or keys throw ConfigError.
SdeSystem make_builtin(const std::string& name, const std::map<std::string, double>& params = {});

/// Parses "k=v,k2=v2" into a map; empty input gives an empty map.
std::map<std::string, double> parse_params(const std::string& text);

}  // namespace tcsde
