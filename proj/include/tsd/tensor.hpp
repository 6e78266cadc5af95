#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tsd {

using Shape = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;

/// Product of extents; 1 for the empty shape.
[[nodiscard]] std::size_t element_count(std::span<const std::size_t> shape);

/// Dense real tensor stored column-major (first index varies fastest).
///
/// An empty shape denotes an order-0 scalar holding exactly one value; every
/// other shape must have extents >= 1.
class DenseTensor {
public:
    /// Order-0 scalar with value 0.
    DenseTensor();
    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    [[nodiscard]] static DenseTensor scalar(double value);

    [[nodiscard]] std::size_t order() const { return shape_.size(); }
    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] const std::vector<double>& values() const { return data_; }

    [[nodiscard]] std::size_t linear_index(std::span<const std::size_t> idx) const;
    [[nodiscard]] double operator()(std::span<const std::size_t> idx) const {
        return data_[linear_index(idx)];
    }
    [[nodiscard]] double& operator()(std::span<const std::size_t> idx) {
        return data_[linear_index(idx)];
    }
    [[nodiscard]] double operator()(std::initializer_list<std::size_t> idx) const {
        return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
    }
    [[nodiscard]] double& operator()(std::initializer_list<std::size_t> idx) {
        return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    [[nodiscard]] double operator[](std::size_t linear) const { return data_[linear]; }
    [[nodiscard]] double& operator[](std::size_t linear) { return data_[linear]; }

    /// Same data reinterpreted under a new shape with equal element count.
    [[nodiscard]] DenseTensor reshaped(Shape shape) const;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Multi-index of a linear offset under column-major order.
[[nodiscard]] std::vector<std::size_t> unravel_index(std::size_t linear,
                                                     std::span<const std::size_t> shape);

/// A permutation of the modes (0, ..., N-1).
///
/// Entry j names the source mode that becomes mode j of the output, so
/// permute(t, v) has shape (I_{v[0]}, ..., I_{v[N-1]}).
class PermVector {
public:
    PermVector() = default;
    explicit PermVector(std::vector<std::size_t> entries);
    PermVector(std::initializer_list<std::size_t> entries)
        : PermVector(std::vector<std::size_t>(entries)) {}

    [[nodiscard]] static PermVector identity(std::size_t n);
    /// (shift, ..., N-1, 0, ..., shift-1).
    [[nodiscard]] static PermVector circular(std::size_t n, std::size_t shift);

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::size_t operator[](std::size_t j) const { return entries_[j]; }
    [[nodiscard]] const std::vector<std::size_t>& entries() const { return entries_; }
    [[nodiscard]] PermVector inverse() const;
    [[nodiscard]] bool is_identity() const;
    /// Shift s when this is circular(size(), s); -1 otherwise.
    [[nodiscard]] long circular_shift() const;

    friend bool operator==(const PermVector&, const PermVector&) = default;

private:
    std::vector<std::size_t> entries_;
};

/// Everything needed to undo a generalised unfolding [v; d].
struct UnfoldSpec {
    Shape source_shape;
    PermVector perm;
    std::size_t row_modes = 0;

    friend bool operator==(const UnfoldSpec&, const UnfoldSpec&) = default;
};

/// A matricized tensor that remembers how it was produced.
struct MatrixView {
    Matrix matrix;
    UnfoldSpec spec;

    [[nodiscard]] Eigen::Index rows() const { return matrix.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return matrix.cols(); }
};

[[nodiscard]] DenseTensor permute(const DenseTensor& t, const PermVector& v);
[[nodiscard]] DenseTensor circular_permute(const DenseTensor& t, std::size_t shift);

/// Rows are the first d permuted modes, columns the rest; d = 0 gives the
/// row vectorization, d = N the column vectorization.
[[nodiscard]] MatrixView unfold_general(const DenseTensor& t, const PermVector& v,
                                        std::size_t d);
/// Mode n on rows, remaining modes in ascending order on columns.
[[nodiscard]] MatrixView unfold_classic(const DenseTensor& t, std::size_t n);
/// Mode n on rows, columns ordered (n+1, ..., N-1, 0, ..., n-1).
[[nodiscard]] MatrixView unfold_circular(const DenseTensor& t, std::size_t n);

[[nodiscard]] DenseTensor fold(const MatrixView& m);
[[nodiscard]] DenseTensor fold_general(const Matrix& m, const Shape& shape,
                                       const PermVector& v, std::size_t d);
[[nodiscard]] DenseTensor fold_classic(const Matrix& m, const Shape& shape, std::size_t n);
[[nodiscard]] DenseTensor fold_circular(const Matrix& m, const Shape& shape, std::size_t n);

[[nodiscard]] PermVector classic_unfold_perm(std::size_t order, std::size_t n);
[[nodiscard]] PermVector circular_unfold_perm(std::size_t order, std::size_t n);

/// Generalised contraction: sums over dims_a[k] of a paired with dims_b[k]
/// of b. The output carries the surviving modes of a (ascending) followed by
/// the surviving modes of b (ascending). A full contraction yields an order-0
/// scalar.
[[nodiscard]] DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                                   std::span<const std::size_t> dims_a,
                                   std::span<const std::size_t> dims_b);
[[nodiscard]] inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                                          std::initializer_list<std::size_t> dims_a,
                                          std::initializer_list<std::size_t> dims_b) {
    return contract(a, b, std::span<const std::size_t>(dims_a.begin(), dims_a.size()),
                    std::span<const std::size_t>(dims_b.begin(), dims_b.size()));
}

[[nodiscard]] double frobenius_norm(const DenseTensor& t);
/// ||a - b||_F; shapes must match.
[[nodiscard]] double frobenius_distance(const DenseTensor& a, const DenseTensor& b);

[[nodiscard]] std::string shape_string(std::span<const std::size_t> shape);

}  // namespace tsd
