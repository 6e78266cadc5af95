#include "tsd/pam.hpp"

#include "tsd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsd {

ObservationMask::ObservationMask(Shape shape, std::vector<std::uint64_t> observed)
    : shape_(std::move(shape)), observed_(std::move(observed)) {
    const std::size_t total = element_count(shape_);
    std::sort(observed_.begin(), observed_.end());
    observed_.erase(std::unique(observed_.begin(), observed_.end()), observed_.end());
    if (!observed_.empty() && observed_.back() >= total) {
        throw std::out_of_range("observed offset " + std::to_string(observed_.back()) +
                                " outside shape " + shape_string(shape_));
    }
    flags_.assign(total, 0);
    for (std::uint64_t i : observed_) flags_[i] = 1;
}

ObservationMask ObservationMask::full(const Shape& shape) {
    std::vector<std::uint64_t> all(element_count(shape));
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    return ObservationMask(shape, std::move(all));
}

ObservationMask ObservationMask::none(const Shape& shape) { return ObservationMask(shape, {}); }

ObservationMask ObservationMask::random(const Shape& shape, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("observed fraction must lie in (0, 1], got " +
                                    std::to_string(fraction));
    }
    const std::size_t total = element_count(shape);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    std::vector<std::uint64_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
    for (std::size_t i = 0; i < count && i + 1 < total; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return ObservationMask(shape, std::move(pool));
}

void PamOptions::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
    ranks.validate();
}

Assembly resolve_assembly(Assembly requested, const RankProfile& ranks, const Shape& mode_sizes) {
    if (requested != Assembly::automatic) return requested;
    const std::size_t n = ranks.order();
    const double cells = static_cast<double>(element_count(mode_sizes));
    double largest = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t first = (k + 1) % n;
        const double rows = static_cast<double>(ranks.right[k] * ranks.ring[k] *
                                                ranks.ring[first] * ranks.left[first]);
        largest = std::max(largest, rows * cells);
    }
    return largest > static_cast<double>(kMaterializeLimit) ? Assembly::normal_equations
                                                            : Assembly::materialized;
}

namespace {

void check_rho(double rho) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("proximal parameter rho must be positive, got " +
                                    std::to_string(rho));
    }
}

void check_data(const TSNetwork& net, const DenseTensor& x) {
    if (x.shape() != net.mode_sizes) {
        throw std::invalid_argument("data shape " + shape_string(x.shape()) +
                                    " does not match network mode sizes " +
                                    shape_string(net.mode_sizes));
    }
}

Matrix as_row(const DenseTensor& t) {
    return Eigen::Map<const Matrix>(t.data().data(), 1, static_cast<Eigen::Index>(t.size()));
}

}  // namespace

TSNetwork pam_update_factor(const TSNetwork& net, std::size_t k, const DenseTensor& x, double rho,
                            Assembly assembly) {
    check_rho(rho);
    check_data(net, x);
    require_valid(net);
    if (k >= net.order()) {
        throw std::out_of_range("factor index " + std::to_string(k) + " out of range");
    }
    const Matrix prev = unfold_classic(net.factors[k], 1).matrix;
    Matrix g;
    if (resolve_assembly(assembly, net.profile, net.mode_sizes) == Assembly::normal_equations) {
        g = ridge_right_solve_normal(factor_env_cross(net, k, x), factor_env_gram(net, k), prev,
                                     rho);
    } else {
        const EnvironmentTensor env = build_env_factor(net, k);
        g = ridge_right_solve(unfold_circular(x, k).matrix, env.unfolded(), prev, rho);
    }
    TSNetwork out = net;
    out.factors[k] = fold_classic(g, net.factors[k].shape(), 1);
    return out;
}

TSNetwork pam_update_core(const TSNetwork& net, std::size_t k, const DenseTensor& x, double rho,
                          Assembly assembly) {
    check_rho(rho);
    check_data(net, x);
    require_valid(net);
    if (k >= net.order()) {
        throw std::out_of_range("core index " + std::to_string(k) + " out of range");
    }
    const Matrix prev = as_row(net.cores[k]);
    Matrix c;
    if (resolve_assembly(assembly, net.profile, net.mode_sizes) == Assembly::normal_equations) {
        c = ridge_right_solve_normal(core_env_cross(net, k, x), core_env_gram(net, k), prev, rho);
    } else {
        const EnvironmentTensor env = build_env_core(net, k);
        c = ridge_right_solve(as_row(circular_permute(x, env.shift)), env.unfolded(), prev, rho);
    }
    TSNetwork out = net;
    out.cores[k] =
        DenseTensor(net.cores[k].shape(), std::vector<double>(c.data(), c.data() + c.size()));
    return out;
}

DenseTensor pam_update_x(const DenseTensor& x_prev, const DenseTensor& approx,
                         const DenseTensor& h, const ObservationMask& mask, double rho) {
    check_rho(rho);
    if (x_prev.shape() != h.shape() || approx.shape() != h.shape() || mask.shape() != h.shape()) {
        throw std::invalid_argument("pam_update_x: shapes of X, approximation, H and mask differ");
    }
    DenseTensor out(h.shape());
    const double inv = 1.0 / (1.0 + rho);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = mask.contains(i) ? h[i] : (approx[i] + rho * x_prev[i]) * inv;
    }
    return out;
}

DenseTensor pam_update_x(const DenseTensor& x_prev, const TSNetwork& net, const DenseTensor& h,
                         const ObservationMask& mask, double rho) {
    return pam_update_x(x_prev, reconstruct(net), h, mask, rho);
}

CompletionResult pam_complete(const DenseTensor& h, const ObservationMask& mask,
                              const PamOptions& opts, const DenseTensor* truth,
                              const PamObserver& observer) {
    opts.validate();
    if (h.order() != opts.ranks.order()) {
        throw std::invalid_argument("tensor of order " + std::to_string(h.order()) +
                                    " does not match rank profile of order " +
                                    std::to_string(opts.ranks.order()));
    }
    if (mask.shape() != h.shape()) {
        throw std::invalid_argument("mask shape " + shape_string(mask.shape()) +
                                    " does not match tensor shape " + shape_string(h.shape()));
    }
    if (mask.empty()) throw std::invalid_argument("observation mask is empty");
    for (std::uint64_t i : mask.observed()) {
        if (!std::isfinite(h[i])) {
            throw std::invalid_argument("observed entry " + std::to_string(i) + " is not finite");
        }
    }
    if (truth && truth->shape() != h.shape()) {
        throw std::invalid_argument("ground truth shape " + shape_string(truth->shape()) +
                                    " does not match tensor shape " + shape_string(h.shape()));
    }

    const Assembly assembly = resolve_assembly(opts.assembly, opts.ranks, h.shape());
    auto approximate = [assembly](const TSNetwork& net) {
        return assembly == Assembly::normal_equations ? reconstruct_cores_first(net)
                                                      : reconstruct(net);
    };

    CompletionResult res;
    res.recovered = DenseTensor(h.shape());
    for (std::uint64_t i : mask.observed()) res.recovered[i] = h[i];
    {
        std::mt19937_64 rng(opts.seed);
        res.network = random_network(h.shape(), opts.ranks, rng, opts.init_scale);
    }
    {
        const double d = frobenius_distance(res.recovered, approximate(res.network));
        res.objective.push_back(0.5 * d * d);
    }

    const std::size_t n = h.order();
    for (std::size_t t = 1; t <= opts.max_iter; ++t) {
        for (std::size_t k = 0; k < n; ++k) {
            res.network = pam_update_factor(res.network, k, res.recovered, opts.rho, assembly);
            res.network = pam_update_core(res.network, k, res.recovered, opts.rho, assembly);
        }
        const DenseTensor approx = approximate(res.network);
        DenseTensor next = pam_update_x(res.recovered, approx, h, mask, opts.rho);

        const double change = frobenius_distance(next, res.recovered);
        const double norm = frobenius_norm(next);
        const double rel = norm > 0.0 ? change / norm : change;
        res.recovered = std::move(next);

        const double d = frobenius_distance(res.recovered, approx);
        res.objective.push_back(0.5 * d * d);
        res.relative_change.push_back(rel);
        res.iterations = t;
        if (observer) observer(PamIterate{t, res.recovered, res.network, res.objective.back()});
        if (rel < opts.tol) {
            res.converged = true;
            break;
        }
    }
    if (truth) res.metrics = completion_metrics(res.recovered, *truth, mask);
    return res;
}

CompletionMetrics completion_metrics(const DenseTensor& x, const DenseTensor& truth,
                                     const ObservationMask& mask) {
    if (x.shape() != truth.shape() || mask.shape() != truth.shape()) {
        throw std::invalid_argument("metrics: shapes of X, ground truth and mask differ");
    }
    CompletionMetrics m;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (mask.contains(i)) continue;
        const double diff = x[i] - truth[i];
        num += diff * diff;
        den += truth[i] * truth[i];
    }
    m.rse_missing = den > 0.0 ? std::sqrt(num) / std::sqrt(den)
                              : std::numeric_limits<double>::infinity();

    const std::size_t bands = truth.order() == 0 ? 1 : truth.shape().back();
    const std::size_t per_band = truth.size() / bands;
    m.psnr.resize(bands);
    for (std::size_t b = 0; b < bands; ++b) {
        double peak = -std::numeric_limits<double>::infinity();
        double sse = 0.0;
        for (std::size_t i = b * per_band; i < (b + 1) * per_band; ++i) {
            peak = std::max(peak, truth[i]);
            const double diff = x[i] - truth[i];
            sse += diff * diff;
        }
        const double mse = sse / static_cast<double>(per_band);
        const double psnr = mse > 0.0 ? 10.0 * std::log10(peak * peak / mse) : kPsnrCap;
        m.psnr[b] = std::min(psnr, kPsnrCap);
    }
    m.mpsnr = std::accumulate(m.psnr.begin(), m.psnr.end(), 0.0) / static_cast<double>(bands);
    return m;
}

}  // namespace tsd
