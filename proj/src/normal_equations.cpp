// Gram and cross products of the environment unfoldings, assembled without
// forming the environments themselves. Used by the proximal solver once the
// environments outgrow memory.

#include "tsd/network.hpp"

#include <stdexcept>

namespace tsd {

TSNetwork doubled_network(const TSNetwork& net) {
    require_valid(net);
    const std::size_t n = net.order();
    const auto& p = net.profile;
    RankProfile sq;
    for (std::size_t k = 0; k < n; ++k) {
        sq.left.push_back(p.left[k] * p.left[k]);
        sq.right.push_back(p.right[k] * p.right[k]);
        sq.ring.push_back(p.ring[k] * p.ring[k]);
    }
    TSNetwork out = TSNetwork::zeros(Shape(n, 1), sq);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r1 = p.left[k], r2 = p.right[k], len = net.mode_sizes[k];
        const auto g = net.factors[k].data();
        auto gd = out.factors[k].data();
        for (std::size_t b = 0; b < r2; ++b)
            for (std::size_t b2 = 0; b2 < r2; ++b2)
                for (std::size_t a = 0; a < r1; ++a)
                    for (std::size_t a2 = 0; a2 < r1; ++a2) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < len; ++i) {
                            s += g[a + r1 * (i + len * b)] * g[a2 + r1 * (i + len * b2)];
                        }
                        gd[(a + r1 * a2) + r1 * r1 * (b + r2 * b2)] = s;
                    }

        const Shape cs = net.cores[k].shape();
        const auto c = net.cores[k].data();
        auto cd = out.cores[k].data();
        const std::size_t total = c.size();
        for (std::size_t q = 0; q < total; ++q) {
            const std::size_t b = q % cs[0];
            const std::size_t l = (q / cs[0]) % cs[1];
            const std::size_t m = (q / (cs[0] * cs[1])) % cs[2];
            const std::size_t a = q / (cs[0] * cs[1] * cs[2]);
            for (std::size_t q2 = 0; q2 < total; ++q2) {
                const std::size_t b2 = q2 % cs[0];
                const std::size_t l2 = (q2 / cs[0]) % cs[1];
                const std::size_t m2 = (q2 / (cs[0] * cs[1])) % cs[2];
                const std::size_t a2 = q2 / (cs[0] * cs[1] * cs[2]);
                const std::size_t lin =
                    (b + cs[0] * b2) +
                    cs[0] * cs[0] *
                        ((l + cs[1] * l2) +
                         cs[1] * cs[1] * ((m + cs[2] * m2) + cs[2] * cs[2] * (a + cs[3] * a2)));
                cd[lin] = c[q] * c[q2];
            }
        }
    }
    return out;
}

Matrix factor_env_gram(const TSNetwork& net, std::size_t k) {
    const EnvironmentTensor env = build_env_factor(doubled_network(net), k);
    const std::size_t r1 = net.profile.left[k], r2 = net.profile.right[k];
    const auto e = env.tensor.data();
    const auto dim = static_cast<Eigen::Index>(r1 * r2);
    Matrix gram(dim, dim);
    for (std::size_t b = 0; b < r2; ++b)
        for (std::size_t b2 = 0; b2 < r2; ++b2)
            for (std::size_t a = 0; a < r1; ++a)
                for (std::size_t a2 = 0; a2 < r1; ++a2) {
                    gram(static_cast<Eigen::Index>(a + r1 * b),
                         static_cast<Eigen::Index>(a2 + r1 * b2)) =
                        e[(a + r1 * a2) + r1 * r1 * (b + r2 * b2)];
                }
    return gram;
}

Matrix core_env_gram(const TSNetwork& net, std::size_t k) {
    const EnvironmentTensor env = build_env_core(doubled_network(net), k);
    const std::size_t first = env.shift;  // n_1
    const auto& p = net.profile;
    // Row multi-index of Z_[z_v;4]: (R_{k,2}, L_k, L_{n1}, R_{n1,1}).
    const std::size_t rb = p.right[k], rl = p.ring[k], fl = p.ring[first], fa = p.left[first];
    const auto e = env.tensor.data();
    const auto dim = static_cast<Eigen::Index>(rb * rl * fl * fa);
    Matrix gram(dim, dim);
    auto row = [&](std::size_t b, std::size_t l, std::size_t l1, std::size_t a) {
        return static_cast<Eigen::Index>(b + rb * (l + rl * (l1 + fl * a)));
    };
    for (std::size_t a = 0; a < fa; ++a)
        for (std::size_t a2 = 0; a2 < fa; ++a2)
            for (std::size_t l1 = 0; l1 < fl; ++l1)
                for (std::size_t l12 = 0; l12 < fl; ++l12)
                    for (std::size_t l = 0; l < rl; ++l)
                        for (std::size_t l2 = 0; l2 < rl; ++l2)
                            for (std::size_t b = 0; b < rb; ++b)
                                for (std::size_t b2 = 0; b2 < rb; ++b2) {
                                    // Non-unit modes of the doubled environment:
                                    // (R_{n1,1}^2, L_{n1}^2, L_k^2, R_{k,2}^2).
                                    const std::size_t lin =
                                        (a + fa * a2) +
                                        fa * fa *
                                            ((l1 + fl * l12) +
                                             fl * fl * ((l + rl * l2) + rl * rl * (b + rb * b2)));
                                    gram(row(b, l, l1, a), row(b2, l2, l12, a2)) = e[lin];
                                }
    return gram;
}

namespace {

/// X under the circular order placing component k last, contracted with
/// G_{n1}, C_{n1}, ..., G_{n_{N-1}}, C_{n_{N-1}}. Shape
/// (I_k, R_{n1,1}, L_{n1}, L_k, R_{k,1}).
DenseTensor project_data(const TSNetwork& net, std::size_t k, const DenseTensor& x) {
    require_valid(net);
    const std::size_t n = net.order();
    if (k >= n) {
        throw std::out_of_range("component index " + std::to_string(k) +
                                " out of range for order " + std::to_string(n));
    }
    if (x.shape() != net.mode_sizes) {
        throw std::invalid_argument("data shape " + shape_string(x.shape()) +
                                    " does not match network mode sizes " +
                                    shape_string(net.mode_sizes));
    }
    const std::size_t shift = shift_placing_last(n, k);
    const TSNetwork r = circular_shift_network(net, shift);

    DenseTensor s = contract(circular_permute(x, shift), r.factors[0], {0}, {1});
    std::size_t m = n - 1;  // data modes still open, always leading
    s = contract(s, r.cores[0], {m + 1}, {0});
    for (std::size_t j = 1; j + 1 < n; ++j) {
        s = contract(s, r.factors[j], {0, m + 3}, {1, 0});
        --m;
        s = contract(s, r.cores[j], {m + 2, m + 3}, {1, 0});
    }
    return s;
}

}  // namespace

Matrix factor_env_cross(const TSNetwork& net, std::size_t k, const DenseTensor& x) {
    const std::size_t n = net.order();
    const DenseTensor s = project_data(net, k, x);
    const TSNetwork r = circular_shift_network(net, shift_placing_last(n, k));
    const DenseTensor t = contract(s, r.cores[n - 1], {1, 2, 3}, {3, 2, 1});
    const auto rows = static_cast<Eigen::Index>(net.mode_sizes[k]);
    return Eigen::Map<const Matrix>(t.data().data(), rows,
                                    static_cast<Eigen::Index>(t.size()) / rows);
}

Matrix core_env_cross(const TSNetwork& net, std::size_t k, const DenseTensor& x) {
    const std::size_t n = net.order();
    const DenseTensor s = project_data(net, k, x);
    const TSNetwork r = circular_shift_network(net, shift_placing_last(n, k));
    const DenseTensor t = permute(contract(s, r.factors[n - 1], {0, 4}, {1, 0}), {3, 2, 1, 0});
    return Eigen::Map<const Matrix>(t.data().data(), 1, static_cast<Eigen::Index>(t.size()));
}

DenseTensor reconstruct_cores_first(const TSNetwork& net) {
    return reassemble_via_cores_all(net, PermVector::identity(net.order()), 1);
}

}  // namespace tsd
