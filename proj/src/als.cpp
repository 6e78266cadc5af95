#include "tsd/als.hpp"

#include <cmath>
#include <stdexcept>

namespace tsd {

void AlsOptions::validate() const {
    if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (!(svd_cutoff > 0.0) || !(svd_cutoff < 1.0)) {
        throw std::invalid_argument("svd_cutoff must lie in (0, 1)");
    }
    if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
}

TSNetwork init_network(const Shape& mode_sizes, const RankProfile& profile,
                       const AlsOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    return random_network(mode_sizes, profile, rng, opts.init_scale);
}

double relative_error(const DenseTensor& x, const TSNetwork& net) {
    const double err = frobenius_distance(x, reconstruct(net));
    const double norm = frobenius_norm(x);
    return norm > 0.0 ? err / norm : err;
}

namespace {

void check_data(const TSNetwork& net, const DenseTensor& x) {
    if (x.shape() != net.mode_sizes) {
        throw std::invalid_argument("data shape " + shape_string(x.shape()) +
                                    " does not match network mode sizes " +
                                    shape_string(net.mode_sizes));
    }
}

}  // namespace

TSNetwork als_update_factor(const TSNetwork& net, std::size_t k, const DenseTensor& x,
                            double svd_cutoff) {
    check_data(net, x);
    const EnvironmentTensor env = build_env_factor(net, k);
    const Matrix g = lstsq_right(unfold_circular(x, k).matrix, env.unfolded(), svd_cutoff);
    TSNetwork out = net;
    out.factors[k] = fold_classic(g, net.factors[k].shape(), 1);
    return out;
}

TSNetwork als_update_core(const TSNetwork& net, std::size_t k, const DenseTensor& x,
                          double svd_cutoff) {
    check_data(net, x);
    const EnvironmentTensor env = build_env_core(net, k);
    const DenseTensor xs = circular_permute(x, env.shift);
    const Matrix row = Eigen::Map<const Matrix>(xs.data().data(), 1,
                                                static_cast<Eigen::Index>(xs.size()));
    const Matrix c = lstsq_right(row, env.unfolded(), svd_cutoff);
    TSNetwork out = net;
    out.cores[k] = DenseTensor(net.cores[k].shape(),
                               std::vector<double>(c.data(), c.data() + c.size()));
    return out;
}

AlsFit als_fit(const DenseTensor& x, const RankProfile& profile, const AlsOptions& opts) {
    opts.validate();
    profile.validate();
    if (x.order() != profile.order()) {
        throw std::invalid_argument("tensor of order " + std::to_string(x.order()) +
                                    " does not match rank profile of order " +
                                    std::to_string(profile.order()));
    }
    return als_fit(x, init_network(x.shape(), profile, opts), opts);
}

AlsFit als_fit(const DenseTensor& x, TSNetwork start, const AlsOptions& opts) {
    opts.validate();
    require_valid(start);
    check_data(start, x);
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("input tensor has non-finite entries");
    }

    AlsFit fit{std::move(start), {}};
    auto& rep = fit.report;
    const std::size_t n = x.order();
    if (opts.record_block_errors) rep.block_errors.push_back(relative_error(x, fit.network));

    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (std::size_t k = 0; k < n; ++k) {
            fit.network = als_update_factor(fit.network, k, x, opts.svd_cutoff);
            if (opts.record_block_errors) rep.block_errors.push_back(relative_error(x, fit.network));
            fit.network = als_update_core(fit.network, k, x, opts.svd_cutoff);
            if (opts.record_block_errors) rep.block_errors.push_back(relative_error(x, fit.network));
        }
        const double err = opts.record_block_errors ? rep.block_errors.back()
                                                    : relative_error(x, fit.network);
        rep.sweep_errors.push_back(err);
        rep.sweeps_run = sweep + 1;
        rep.final_error = err;
        if (err <= opts.rel_tol) {
            rep.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace tsd
