#include "tsd/network.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace tsd {

RankProfile RankProfile::uniform(std::size_t order, std::size_t rank, std::size_t ring_rank) {
    RankProfile p;
    p.left.assign(order, rank);
    p.right.assign(order, rank);
    p.ring.assign(order, ring_rank);
    return p;
}

void RankProfile::validate() const {
    const std::size_t n = left.size();
    if (n < 3) {
        throw std::invalid_argument("rank profile needs order >= 3, got " + std::to_string(n));
    }
    if (right.size() != n || ring.size() != n) {
        throw std::invalid_argument("rank profile lists differ in length: R1 " +
                                    std::to_string(n) + ", R2 " + std::to_string(right.size()) +
                                    ", L " + std::to_string(ring.size()));
    }
    auto positive = [](const std::vector<std::size_t>& v) {
        return std::all_of(v.begin(), v.end(), [](std::size_t r) { return r >= 1; });
    };
    if (!positive(left) || !positive(right) || !positive(ring)) {
        throw std::invalid_argument("all ranks must be >= 1");
    }
}

RankProfile RankProfile::rotated(std::size_t shift) const {
    const std::size_t n = order();
    RankProfile p;
    p.left.resize(n);
    p.right.resize(n);
    p.ring.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = (shift + j) % n;
        p.left[j] = left[src];
        p.right[j] = right[src];
        p.ring[j] = ring[src];
    }
    return p;
}

Shape factor_shape(const RankProfile& p, const Shape& mode_sizes, std::size_t k) {
    return {p.left[k], mode_sizes[k], p.right[k]};
}

Shape core_shape(const RankProfile& p, std::size_t k) {
    const std::size_t next = (k + 1) % p.order();
    return {p.right[k], p.ring[k], p.ring[next], p.left[next]};
}

TSNetwork TSNetwork::zeros(Shape mode_sizes, RankProfile profile) {
    profile.validate();
    if (mode_sizes.size() != profile.order()) {
        throw std::invalid_argument("mode sizes " + shape_string(mode_sizes) +
                                    " do not match rank profile of order " +
                                    std::to_string(profile.order()));
    }
    TSNetwork net;
    net.mode_sizes = std::move(mode_sizes);
    net.profile = std::move(profile);
    for (std::size_t k = 0; k < net.order(); ++k) {
        net.factors.emplace_back(factor_shape(net.profile, net.mode_sizes, k));
        net.cores.emplace_back(core_shape(net.profile, k));
    }
    return net;
}

TSNetwork random_network(const Shape& mode_sizes, const RankProfile& profile,
                         std::mt19937_64& rng, double scale) {
    TSNetwork net = TSNetwork::zeros(mode_sizes, profile);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < net.order(); ++k) {
        for (double& x : net.factors[k].data()) x = scale * normal(rng);
        for (double& x : net.cores[k].data()) x = scale * normal(rng);
    }
    return net;
}

std::vector<std::string> validate(const TSNetwork& net) {
    std::vector<std::string> out;
    const std::size_t n = net.order();
    try {
        net.profile.validate();
    } catch (const std::invalid_argument& e) {
        out.emplace_back(e.what());
        return out;
    }
    if (net.profile.order() != n) {
        out.push_back("profile order " + std::to_string(net.profile.order()) +
                      " differs from mode count " + std::to_string(n));
        return out;
    }
    if (net.factors.size() != n || net.cores.size() != n) {
        out.push_back("expected " + std::to_string(n) + " factors and cores, got " +
                      std::to_string(net.factors.size()) + " and " +
                      std::to_string(net.cores.size()));
        return out;
    }
    const auto& p = net.profile;
    // Names below are 1-based to match the usual G_k / C_k / R_{k,s} / L_k labels.
    auto name = [](const char* sym, std::size_t k) { return sym + std::to_string(k + 1); };
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t next = (k + 1) % n;
        const auto& g = net.factors[k];
        if (g.order() != 3) {
            out.push_back(name("G_", k) + " has order " + std::to_string(g.order()) +
                          ", expected 3");
        } else {
            const std::string labels[3] = {"R_{" + std::to_string(k + 1) + ",1}",
                                           "I_" + std::to_string(k + 1),
                                           "R_{" + std::to_string(k + 1) + ",2}"};
            const std::size_t want[3] = {p.left[k], net.mode_sizes[k], p.right[k]};
            for (std::size_t m = 0; m < 3; ++m) {
                if (g.extent(m) != want[m]) {
                    out.push_back(name("G_", k) + " mode " + std::to_string(m + 1) + " extent " +
                                  std::to_string(g.extent(m)) + " != " + labels[m] + " = " +
                                  std::to_string(want[m]));
                }
            }
        }
        const auto& c = net.cores[k];
        if (c.order() != 4) {
            out.push_back(name("C_", k) + " has order " + std::to_string(c.order()) +
                          ", expected 4");
        } else {
            const std::string labels[4] = {"R_{" + std::to_string(k + 1) + ",2}",
                                           "L_" + std::to_string(k + 1),
                                           "L_" + std::to_string(next + 1),
                                           "R_{" + std::to_string(next + 1) + ",1}"};
            const std::size_t want[4] = {p.right[k], p.ring[k], p.ring[next], p.left[next]};
            for (std::size_t m = 0; m < 4; ++m) {
                if (c.extent(m) != want[m]) {
                    out.push_back(name("C_", k) + " mode " + std::to_string(m + 1) + " extent " +
                                  std::to_string(c.extent(m)) + " != " + labels[m] + " = " +
                                  std::to_string(want[m]));
                }
            }
        }
    }
    return out;
}

void require_valid(const TSNetwork& net) {
    const auto violations = validate(net);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid tensor star network: " + violations.front());
    }
}

namespace {

/// Contracts G_1 C_1 ... G_{N-1} C_{N-1} in chain order. The result has shape
/// (R_{1,1}, I_1, L_1, I_2, ..., I_{N-1}, L_N, R_{N,1}).
DenseTensor chain_head(const TSNetwork& net) {
    const std::size_t n = net.order();
    DenseTensor state = contract(net.factors[0], net.cores[0], {2}, {0});
    for (std::size_t k = 1; k + 1 < n; ++k) {
        // state order is k + 4 before G_k; its last mode is R_{k,1}.
        state = contract(state, net.factors[k], {k + 3}, {0});
        state = contract(state, net.cores[k], {k + 2, k + 4}, {1, 0});
    }
    return state;
}

/// chain_head followed by G_N: (R_{1,1}, I_1, L_1, I_2, ..., I_{N-1}, L_N, I_N, R_{N,2}).
DenseTensor chain_through_last_factor(const TSNetwork& net) {
    const std::size_t n = net.order();
    return contract(chain_head(net), net.factors[n - 1], {n + 2}, {0});
}

}  // namespace

DenseTensor reconstruct(const TSNetwork& net) {
    require_valid(net);
    const std::size_t n = net.order();
    return contract(chain_through_last_factor(net), net.cores[n - 1], {0, 2, n + 1, n + 3},
                    {3, 2, 1, 0});
}

double reconstruct_elementwise(const TSNetwork& net, std::span<const std::size_t> idx) {
    require_valid(net);
    const std::size_t n = net.order();
    if (idx.size() != n) {
        throw std::out_of_range("index arity " + std::to_string(idx.size()) +
                                " does not match order " + std::to_string(n));
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (idx[k] >= net.mode_sizes[k]) {
            throw std::out_of_range("index " + std::to_string(idx[k]) + " out of range for mode " +
                                    std::to_string(k) + " of size " +
                                    std::to_string(net.mode_sizes[k]));
        }
    }
    const auto& p = net.profile;
    auto g = [&](std::size_t k, std::size_t a, std::size_t b) {
        // G_k(a, i_k, b)
        return net.factors[k][a + p.left[k] * (idx[k] + net.mode_sizes[k] * b)];
    };
    auto c = [&](std::size_t k, std::size_t b, std::size_t l, std::size_t l_next,
                 std::size_t a_next) {
        // C_k(b, l, l_next, a_next)
        const std::size_t next = (k + 1) % n;
        return net.cores[k][b + p.right[k] * (l + p.ring[k] * (l_next + p.ring[next] * a_next))];
    };

    std::size_t a0 = 0, l0 = 0;
    // Sum over C_k's free indices and G_{k+1}, given r_{k,2} = b and l_k = l fixed.
    std::function<double(std::size_t, std::size_t, std::size_t, double)> tail =
        [&](std::size_t k, std::size_t l, std::size_t b, double partial) -> double {
        if (k + 1 == n) return partial * c(k, b, l, l0, a0);
        const std::size_t next = k + 1;
        double s = 0.0;
        for (std::size_t l_next = 0; l_next < p.ring[next]; ++l_next) {
            for (std::size_t a_next = 0; a_next < p.left[next]; ++a_next) {
                const double ck = c(k, b, l, l_next, a_next);
                for (std::size_t b_next = 0; b_next < p.right[next]; ++b_next) {
                    s += tail(next, l_next, b_next, partial * ck * g(next, a_next, b_next));
                }
            }
        }
        return s;
    };

    double total = 0.0;
    for (a0 = 0; a0 < p.left[0]; ++a0) {
        for (l0 = 0; l0 < p.ring[0]; ++l0) {
            for (std::size_t b0 = 0; b0 < p.right[0]; ++b0) {
                total += tail(0, l0, b0, g(0, a0, b0));
            }
        }
    }
    return total;
}

TSNetwork circular_shift_network(const TSNetwork& net, std::size_t shift) {
    const std::size_t n = net.order();
    if (shift > n) {
        throw std::out_of_range("network shift " + std::to_string(shift) +
                                " out of range for order " + std::to_string(n));
    }
    TSNetwork out;
    out.profile = net.profile.rotated(shift);
    out.mode_sizes.resize(n);
    out.factors.reserve(n);
    out.cores.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = (shift + j) % n;
        out.mode_sizes[j] = net.mode_sizes[src];
        out.factors.push_back(net.factors[src]);
        out.cores.push_back(net.cores[src]);
    }
    return out;
}

namespace {

std::size_t checked_circular_shift(const PermVector& n, std::size_t order) {
    const long s = n.circular_shift();
    if (n.size() != order || s < 0) {
        throw std::invalid_argument("expected a circular order of length " +
                                    std::to_string(order) + ", got " +
                                    shape_string(n.entries()));
    }
    return static_cast<std::size_t>(s);
}

}  // namespace

DenseTensor contract_cores_all(const TSNetwork& net, const PermVector& n) {
    require_valid(net);
    const std::size_t order = net.order();
    const TSNetwork r = circular_shift_network(net, checked_circular_shift(n, order));
    DenseTensor state = r.cores[0];
    for (std::size_t j = 1; j + 1 < order; ++j) {
        // Last two modes are (L_{n_{j+1}}, R_{n_{j+1},1}); the ring mode sits at 2j.
        state = contract(state, r.cores[j], {2 * j}, {1});
    }
    return contract(state, r.cores[order - 1], {1, 2 * order - 2}, {2, 1});
}

DenseTensor reassemble_via_cores_all(const TSNetwork& net, const PermVector& n,
                                     std::size_t partner) {
    const std::size_t order = net.order();
    if (partner == 0 || partner >= order) {
        throw std::out_of_range("partner position must lie in 1.." + std::to_string(order - 1));
    }
    const TSNetwork r = circular_shift_network(net, checked_circular_shift(n, order));
    const DenseTensor all = contract_cores_all(net, n);

    // (I_{n1}, R_{n2,1}, R_{n2,2}, ..., R_{nN,1}, R_{nN,2})
    DenseTensor state = contract(r.factors[0], all, {0, 2}, {2 * order - 1, 0});
    state = contract(state, r.factors[partner], {2 * partner - 1, 2 * partner}, {0, 2});

    // Each absorbed factor drops its rank pair and appends its mode at the back,
    // so the next pending pair always sits at positions 1 and 2.
    std::vector<std::size_t> mode_of_position{0, partner};
    for (std::size_t j = 1; j < order; ++j) {
        if (j == partner) continue;
        state = contract(state, r.factors[j], {1, 2}, {0, 2});
        mode_of_position.push_back(j);
    }
    std::vector<std::size_t> perm(order);
    for (std::size_t pos = 0; pos < order; ++pos) perm[mode_of_position[pos]] = pos;
    return permute(state, PermVector(std::move(perm)));
}

PermVector factor_env_perm(std::size_t order) {
    // (N, N+1, 1, ..., N-1) in 1-based positions.
    std::vector<std::size_t> v{order - 1, order};
    for (std::size_t j = 0; j + 1 < order; ++j) v.push_back(j);
    return PermVector(std::move(v));
}

PermVector core_env_perm(std::size_t order) {
    // (N+4, N+2, 3, 1, 2, 4, 5, ..., N+1, N+3) in 1-based positions.
    std::vector<std::size_t> v{order + 3, order + 1, 2, 0, 1};
    for (std::size_t j = 3; j <= order; ++j) v.push_back(j);
    v.push_back(order + 2);
    return PermVector(std::move(v));
}

Matrix EnvironmentTensor::unfolded() const {
    const std::size_t n = excludes == Excludes::factor ? tensor.order() - 1 : tensor.order() - 4;
    if (excludes == Excludes::factor) return unfold_general(tensor, factor_env_perm(n), 2).matrix;
    return unfold_general(tensor, core_env_perm(n), 4).matrix;
}

EnvironmentTensor build_env_factor(const TSNetwork& net, std::size_t k) {
    require_valid(net);
    const std::size_t n = net.order();
    if (k >= n) {
        throw std::out_of_range("factor index " + std::to_string(k) + " out of range for order " +
                                std::to_string(n));
    }
    const std::size_t shift = shift_placing_last(n, k);
    const TSNetwork r = circular_shift_network(net, shift);
    EnvironmentTensor env;
    env.tensor = contract(chain_head(r), r.cores[n - 1], {0, 2, n + 1}, {3, 2, 1});
    env.excludes = EnvironmentTensor::Excludes::factor;
    env.index = k;
    env.shift = shift;
    return env;
}

EnvironmentTensor build_env_core(const TSNetwork& net, std::size_t k) {
    require_valid(net);
    const std::size_t n = net.order();
    if (k >= n) {
        throw std::out_of_range("core index " + std::to_string(k) + " out of range for order " +
                                std::to_string(n));
    }
    const std::size_t shift = shift_placing_last(n, k);
    const TSNetwork r = circular_shift_network(net, shift);
    EnvironmentTensor env;
    env.tensor = chain_through_last_factor(r);
    env.excludes = EnvironmentTensor::Excludes::core;
    env.index = k;
    env.shift = shift;
    return env;
}

std::size_t rank_bound_mode(const RankProfile& p, std::size_t k) {
    if (k >= p.order()) {
        throw std::out_of_range("mode " + std::to_string(k) + " out of range for order " +
                                std::to_string(p.order()));
    }
    return p.left[k] * p.right[k];
}

std::size_t rank_bound_general(const RankProfile& p, std::size_t shift, std::size_t d) {
    const std::size_t n = p.order();
    if (shift >= n) {
        throw std::out_of_range("circular shift " + std::to_string(shift) +
                                " out of range for order " + std::to_string(n));
    }
    if (d < 2 || d > n) {
        throw std::out_of_range("unfolding split d = " + std::to_string(d) +
                                " must lie in 2.." + std::to_string(n));
    }
    const std::size_t first = shift;
    const std::size_t last = (shift + d - 1) % n;
    return p.left[first] * p.ring[first] * p.ring[last] * p.right[last];
}

std::uint64_t param_count(const RankProfile& p, const Shape& mode_sizes) {
    const std::size_t n = p.order();
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t next = (k + 1) % n;
        total += std::uint64_t{p.left[k]} * mode_sizes.at(k) * p.right[k];
        total += std::uint64_t{p.right[k]} * p.ring[k] * p.ring[next] * p.left[next];
    }
    return total;
}

}  // namespace tsd
