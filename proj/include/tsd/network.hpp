#pragma once

#include "tsd/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tsd {

/// Latent ranks of a Tensor Star network, indexed cyclically.
///
/// Factor k has shape (left[k], I_k, right[k]); core k has shape
/// (right[k], ring[k], ring[k+1], left[k+1]) with k+1 taken modulo N.
struct RankProfile {
    std::vector<std::size_t> left;   // R_{k,1}
    std::vector<std::size_t> right;  // R_{k,2}
    std::vector<std::size_t> ring;   // L_k

    [[nodiscard]] std::size_t order() const { return left.size(); }

    [[nodiscard]] static RankProfile uniform(std::size_t order, std::size_t rank,
                                             std::size_t ring_rank);
    [[nodiscard]] static RankProfile uniform(std::size_t order, std::size_t rank) {
        return uniform(order, rank, rank);
    }

    /// Throws std::invalid_argument unless N >= 3, list lengths agree and
    /// every rank is >= 1.
    void validate() const;

    /// Profile of the network whose component j is component (shift + j) mod N.
    [[nodiscard]] RankProfile rotated(std::size_t shift) const;

    friend bool operator==(const RankProfile&, const RankProfile&) = default;
};

[[nodiscard]] Shape factor_shape(const RankProfile& p, const Shape& mode_sizes, std::size_t k);
[[nodiscard]] Shape core_shape(const RankProfile& p, std::size_t k);

/// N order-3 factors G_k and N order-4 cores C_k joined in a ring.
struct TSNetwork {
    Shape mode_sizes;
    RankProfile profile;
    std::vector<DenseTensor> factors;
    std::vector<DenseTensor> cores;

    [[nodiscard]] std::size_t order() const { return mode_sizes.size(); }

    /// All-zero network with the shapes implied by the profile.
    [[nodiscard]] static TSNetwork zeros(Shape mode_sizes, RankProfile profile);

    friend bool operator==(const TSNetwork&, const TSNetwork&) = default;
};

/// Network with i.i.d. N(0, scale^2) entries.
[[nodiscard]] TSNetwork random_network(const Shape& mode_sizes, const RankProfile& profile,
                                       std::mt19937_64& rng, double scale = 1.0);

/// Every shape or rank incompatibility in the network; empty when valid.
[[nodiscard]] std::vector<std::string> validate(const TSNetwork& net);
/// Throws std::invalid_argument carrying the first violation.
void require_valid(const TSNetwork& net);

/// Full tensor, contracted along the ring in order G_1, C_1, ..., G_N, C_N.
[[nodiscard]] DenseTensor reconstruct(const TSNetwork& net);

/// One entry by literal summation over every latent index. Exponential in N;
/// meant as a test oracle.
[[nodiscard]] double reconstruct_elementwise(const TSNetwork& net,
                                             std::span<const std::size_t> idx);

/// Rotates factor and core lists so that component j becomes (shift + j) mod N.
/// Its reconstruction is circular_permute(reconstruct(net), shift). A shift
/// of N is the full cycle.
[[nodiscard]] TSNetwork circular_shift_network(const TSNetwork& net, std::size_t shift);

/// Ring contraction of all cores under the circular order n = circular(N, shift).
/// Shape (R_{n1,2}, R_{n2,1}, R_{n2,2}, ..., R_{nN,1}, R_{nN,2}, R_{n1,1}).
[[nodiscard]] DenseTensor contract_cores_all(const TSNetwork& net, const PermVector& n);

/// The circularly permuted tensor rebuilt by first joining factors n_1 and
/// n_partner through the all-core tensor, then absorbing the other factors.
/// partner is a position in 1..N-1 of the circular order.
[[nodiscard]] DenseTensor reassemble_via_cores_all(const TSNetwork& net, const PermVector& n,
                                                   std::size_t partner);

/// Contraction of every component except one.
struct EnvironmentTensor {
    enum class Excludes { factor, core };

    DenseTensor tensor;
    Excludes excludes = Excludes::factor;
    std::size_t index = 0;
    /// Circular order n = circular(N, shift) places the excluded component last.
    std::size_t shift = 0;

    /// Y_[y_v;2] for a factor (R_{k,1}R_{k,2} x rest) or Z_[z_v;4] for a
    /// core (R_{k,2}L_kL_{k+1}R_{k+1,1} x prod I).
    [[nodiscard]] Matrix unfolded() const;
};

/// Shift of the circular order whose last entry is k.
[[nodiscard]] inline std::size_t shift_placing_last(std::size_t order, std::size_t k) {
    return (k + 1) % order;
}

/// Order-(N+1) tensor of shape (I_{n1}, ..., I_{n_{N-1}}, R_{k,1}, R_{k,2})
/// with X_<k> = (G_k)_(2) * Y_[y_v;2].
[[nodiscard]] EnvironmentTensor build_env_factor(const TSNetwork& net, std::size_t k);

/// Order-(N+4) tensor of shape
/// (R_{n1,1}, I_{n1}, L_{n1}, I_{n2}, ..., I_{n_{N-1}}, L_{nN}, I_{nN}, R_{nN,2})
/// with x_[n;0] = (c_k)_[1:4;0] * Z_[z_v;4].
[[nodiscard]] EnvironmentTensor build_env_core(const TSNetwork& net, std::size_t k);

[[nodiscard]] PermVector factor_env_perm(std::size_t order);
[[nodiscard]] PermVector core_env_perm(std::size_t order);

/// Network whose components are the pairwise self-products of the input's:
/// factor k becomes (R_{k,1}^2, 1, R_{k,2}^2) summed over its mode index, and
/// core k the Kronecker square of C_k. Its environments are the Gram matrices
/// of the input's environments.
[[nodiscard]] TSNetwork doubled_network(const TSNetwork& net);

/// Y Y^T for Y = Y_[y_v;2] of factor k, without materializing Y.
[[nodiscard]] Matrix factor_env_gram(const TSNetwork& net, std::size_t k);
/// X_<k> Y^T for Y = Y_[y_v;2] of factor k.
[[nodiscard]] Matrix factor_env_cross(const TSNetwork& net, std::size_t k, const DenseTensor& x);
/// Z Z^T for Z = Z_[z_v;4] of core k, without materializing Z.
[[nodiscard]] Matrix core_env_gram(const TSNetwork& net, std::size_t k);
/// x_[n;0] Z^T for Z = Z_[z_v;4] of core k.
[[nodiscard]] Matrix core_env_cross(const TSNetwork& net, std::size_t k, const DenseTensor& x);

/// Same tensor as reconstruct(), contracted cores-first. Far cheaper when the
/// mode sizes are large relative to the ranks.
[[nodiscard]] DenseTensor reconstruct_cores_first(const TSNetwork& net);

/// R_{k,1} R_{k,2}.
[[nodiscard]] std::size_t rank_bound_mode(const RankProfile& p, std::size_t k);
[[nodiscard]] inline std::size_t rank_bound_mode(const TSNetwork& net, std::size_t k) {
    return rank_bound_mode(net.profile, k);
}
/// R_{n1,1} L_{n1} L_{nd} R_{nd,2} for n = circular(N, shift) and 2 <= d <= N.
[[nodiscard]] std::size_t rank_bound_general(const RankProfile& p, std::size_t shift,
                                             std::size_t d);
[[nodiscard]] inline std::size_t rank_bound_general(const TSNetwork& net, std::size_t shift,
                                                    std::size_t d) {
    return rank_bound_general(net.profile, shift, d);
}

/// Stored scalars: sum_k R_{k,1} I_k R_{k,2} + R_{k,2} L_k L_{k+1} R_{k+1,1}.
[[nodiscard]] std::uint64_t param_count(const RankProfile& p, const Shape& mode_sizes);
[[nodiscard]] inline std::uint64_t param_count(const TSNetwork& net) {
    return param_count(net.profile, net.mode_sizes);
}

}  // namespace tsd
