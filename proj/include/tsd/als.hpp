#pragma once

#include "tsd/network.hpp"
#include "tsd/numerics.hpp"

#include <cstdint>
#include <vector>

namespace tsd {

struct AlsOptions {
    std::size_t max_sweeps = 100;
    /// Stop once ||X - TSD||_F / ||X||_F falls to this value.
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    double svd_cutoff = kDefaultSvdCutoff;
    double init_scale = 1.0;
    /// Record the relative error after every single block update.
    bool record_block_errors = false;

    void validate() const;
};

struct AlsReport {
    std::size_t sweeps_run = 0;
    /// Relative error after each completed sweep.
    std::vector<double> sweep_errors;
    /// Relative error before the first update, then after each block update
    /// (G_1, C_1, ..., G_N, C_N per sweep). Filled when requested.
    std::vector<double> block_errors;
    double final_error = 0.0;
    bool converged = false;
};

struct AlsFit {
    TSNetwork network;
    AlsReport report;
};

/// Network with i.i.d. N(0, init_scale^2) entries drawn from opts.seed.
[[nodiscard]] TSNetwork init_network(const Shape& mode_sizes, const RankProfile& profile,
                                     const AlsOptions& opts);

/// ||x - reconstruct(net)||_F / ||x||_F, or the absolute error when x = 0.
[[nodiscard]] double relative_error(const DenseTensor& x, const TSNetwork& net);

/// Replaces G_k by the least-squares solution of X_<k> = (G_k)_(2) Y_[y_v;2].
[[nodiscard]] TSNetwork als_update_factor(const TSNetwork& net, std::size_t k,
                                          const DenseTensor& x,
                                          double svd_cutoff = kDefaultSvdCutoff);

/// Replaces C_k by the least-squares solution of
/// x_[n;0] = (c_k)_[1:4;0] Z_[z_v;4].
[[nodiscard]] TSNetwork als_update_core(const TSNetwork& net, std::size_t k,
                                        const DenseTensor& x,
                                        double svd_cutoff = kDefaultSvdCutoff);

/// Block sweeps G_1, C_1, ..., G_N, C_N from a random start.
[[nodiscard]] AlsFit als_fit(const DenseTensor& x, const RankProfile& profile,
                             const AlsOptions& opts = {});
/// Block sweeps from a given start network.
[[nodiscard]] AlsFit als_fit(const DenseTensor& x, TSNetwork start, const AlsOptions& opts = {});

}  // namespace tsd
