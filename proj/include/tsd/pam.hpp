#pragma once

#include "tsd/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace tsd {

/// Set of observed entries, stored as strictly increasing column-major offsets.
class ObservationMask {
public:
    ObservationMask() = default;
    /// Sorts and deduplicates; throws if an offset lies outside the shape.
    ObservationMask(Shape shape, std::vector<std::uint64_t> observed);

    [[nodiscard]] static ObservationMask full(const Shape& shape);
    [[nodiscard]] static ObservationMask none(const Shape& shape);
    /// round(fraction * prod I) distinct offsets drawn uniformly; 0 < fraction <= 1.
    [[nodiscard]] static ObservationMask random(const Shape& shape, double fraction,
                                                std::uint64_t seed);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] const std::vector<std::uint64_t>& observed() const { return observed_; }
    [[nodiscard]] std::size_t count() const { return observed_.size(); }
    [[nodiscard]] std::size_t total() const { return flags_.size(); }
    [[nodiscard]] bool empty() const { return observed_.empty(); }
    [[nodiscard]] bool contains(std::size_t linear) const { return flags_[linear] != 0; }

    friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
        return a.shape_ == b.shape_ && a.observed_ == b.observed_;
    }

private:
    Shape shape_;
    std::vector<std::uint64_t> observed_;
    std::vector<std::uint8_t> flags_;
};

/// How block updates obtain their least-squares operators.
enum class Assembly {
    /// Build each environment tensor and unfold it.
    materialized,
    /// Form only Gram and cross products of the environments.
    normal_equations,
    /// materialized unless an environment would exceed kMaterializeLimit entries.
    automatic,
};

inline constexpr std::size_t kMaterializeLimit = std::size_t{1} << 22;

struct PamOptions {
    double rho = 0.01;
    std::size_t max_iter = 1000;
    double tol = 1e-5;
    std::uint64_t seed = 0;
    RankProfile ranks;
    double init_scale = 1.0;
    Assembly assembly = Assembly::automatic;

    void validate() const;
};

struct CompletionMetrics {
    /// ||(X - H) on missing entries||_F / ||H on missing entries||_F.
    double rse_missing = 0.0;
    /// Per slice of the last mode, capped at kPsnrCap.
    std::vector<double> psnr;
    double mpsnr = 0.0;
};

inline constexpr double kPsnrCap = 100.0;

struct CompletionResult {
    DenseTensor recovered;
    TSNetwork network;
    std::size_t iterations = 0;
    bool converged = false;
    /// psi = 1/2 ||X - TSD||_F^2 at the start, then after every iteration.
    std::vector<double> objective;
    /// ||X^(t) - X^(t-1)||_F / ||X^(t)||_F per iteration.
    std::vector<double> relative_change;
    std::optional<CompletionMetrics> metrics;
};

/// State exposed to an observer after every iteration.
struct PamIterate {
    std::size_t iteration;
    const DenseTensor& x;
    const TSNetwork& network;
    double objective;
};

using PamObserver = std::function<void(const PamIterate&)>;

/// Proximal factor update (rho (G_k)_(2) + X_<k> Y^T)(rho I + Y Y^T)^{-1}.
[[nodiscard]] TSNetwork pam_update_factor(const TSNetwork& net, std::size_t k,
                                          const DenseTensor& x, double rho,
                                          Assembly assembly = Assembly::materialized);

/// Proximal core update (rho c_k + x Z^T)(rho I + Z Z^T)^{-1}.
[[nodiscard]] TSNetwork pam_update_core(const TSNetwork& net, std::size_t k,
                                        const DenseTensor& x, double rho,
                                        Assembly assembly = Assembly::materialized);

/// Observed entries copied from h; the rest (approx + rho x_prev) / (1 + rho).
[[nodiscard]] DenseTensor pam_update_x(const DenseTensor& x_prev, const DenseTensor& approx,
                                       const DenseTensor& h, const ObservationMask& mask,
                                       double rho);
[[nodiscard]] DenseTensor pam_update_x(const DenseTensor& x_prev, const TSNetwork& net,
                                       const DenseTensor& h, const ObservationMask& mask,
                                       double rho);

/// Proximal alternating minimization from X = H on the mask and 0 elsewhere.
[[nodiscard]] CompletionResult pam_complete(const DenseTensor& h, const ObservationMask& mask,
                                            const PamOptions& opts,
                                            const DenseTensor* truth = nullptr,
                                            const PamObserver& observer = {});

[[nodiscard]] CompletionMetrics completion_metrics(const DenseTensor& x,
                                                   const DenseTensor& truth,
                                                   const ObservationMask& mask);

/// Resolves Assembly::automatic for the given ranks and mode sizes.
[[nodiscard]] Assembly resolve_assembly(Assembly requested, const RankProfile& ranks,
                                        const Shape& mode_sizes);

}  // namespace tsd
