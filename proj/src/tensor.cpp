#include "tsd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tsd {

std::size_t element_count(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

namespace {

void check_shape(const Shape& shape) {
    for (std::size_t e : shape) {
        if (e == 0) {
            throw std::invalid_argument("tensor extents must be >= 1, got shape " +
                                        shape_string(shape));
        }
    }
}

std::vector<std::size_t> column_major_strides(std::span<const std::size_t> shape) {
    std::vector<std::size_t> strides(shape.size());
    std::size_t s = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        strides[k] = s;
        s *= shape[k];
    }
    return strides;
}

}  // namespace

DenseTensor::DenseTensor() : data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(element_count(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != element_count(shape_)) {
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_string(shape_));
    }
}

DenseTensor DenseTensor::scalar(double value) { return DenseTensor({}, {value}); }

std::size_t DenseTensor::linear_index(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
        throw std::out_of_range("index arity " + std::to_string(idx.size()) +
                                " does not match tensor order " + std::to_string(order()));
    }
    std::size_t offset = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (idx[k] >= shape_[k]) {
            throw std::out_of_range("index " + std::to_string(idx[k]) + " out of range for mode " +
                                    std::to_string(k) + " of extent " +
                                    std::to_string(shape_[k]));
        }
        offset += idx[k] * stride;
        stride *= shape_[k];
    }
    return offset;
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
    if (element_count(shape) != data_.size()) {
        throw std::invalid_argument("cannot reshape " + shape_string(shape_) + " to " +
                                    shape_string(shape));
    }
    return DenseTensor(std::move(shape), data_);
}

std::vector<std::size_t> unravel_index(std::size_t linear, std::span<const std::size_t> shape) {
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        idx[k] = linear % shape[k];
        linear /= shape[k];
    }
    return idx;
}

// ---------------------------------------------------------------------------
// PermVector

PermVector::PermVector(std::vector<std::size_t> entries) : entries_(std::move(entries)) {
    std::vector<bool> seen(entries_.size(), false);
    for (std::size_t e : entries_) {
        if (e >= entries_.size() || seen[e]) {
            throw std::invalid_argument("not a permutation of 0.." +
                                        std::to_string(entries_.size()) + "-1: " +
                                        shape_string(entries_));
        }
        seen[e] = true;
    }
}

PermVector PermVector::identity(std::size_t n) {
    std::vector<std::size_t> e(n);
    std::iota(e.begin(), e.end(), std::size_t{0});
    return PermVector(std::move(e));
}

PermVector PermVector::circular(std::size_t n, std::size_t shift) {
    if (n == 0 ? shift != 0 : shift >= n) {
        throw std::out_of_range("circular shift " + std::to_string(shift) +
                                " out of range for order " + std::to_string(n));
    }
    std::vector<std::size_t> e(n);
    for (std::size_t j = 0; j < n; ++j) e[j] = (shift + j) % n;
    return PermVector(std::move(e));
}

PermVector PermVector::inverse() const {
    std::vector<std::size_t> inv(entries_.size());
    for (std::size_t j = 0; j < entries_.size(); ++j) inv[entries_[j]] = j;
    return PermVector(std::move(inv));
}

bool PermVector::is_identity() const {
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        if (entries_[j] != j) return false;
    }
    return true;
}

long PermVector::circular_shift() const {
    const std::size_t n = entries_.size();
    if (n == 0) return 0;
    const std::size_t s = entries_[0];
    for (std::size_t j = 0; j < n; ++j) {
        if (entries_[j] != (s + j) % n) return -1;
    }
    return static_cast<long>(s);
}

// ---------------------------------------------------------------------------
// Permutations and unfoldings

DenseTensor permute(const DenseTensor& t, const PermVector& v) {
    const std::size_t n = t.order();
    if (v.size() != n) {
        throw std::invalid_argument("permutation length " + std::to_string(v.size()) +
                                    " does not match tensor order " + std::to_string(n));
    }
    if (v.is_identity()) return t;

    const auto src_strides = column_major_strides(t.shape());
    Shape out_shape(n);
    std::vector<std::size_t> strides(n);
    for (std::size_t j = 0; j < n; ++j) {
        out_shape[j] = t.extent(v[j]);
        strides[j] = src_strides[v[j]];
    }

    std::vector<double> out(t.size());
    const auto src = t.data();
    std::vector<std::size_t> counter(n, 0);
    std::size_t offset = 0;
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        out[lin] = src[offset];
        // Odometer over the output multi-index, first mode fastest.
        for (std::size_t j = 0; j < n; ++j) {
            if (++counter[j] < out_shape[j]) {
                offset += strides[j];
                break;
            }
            offset -= (out_shape[j] - 1) * strides[j];
            counter[j] = 0;
        }
    }
    return DenseTensor(std::move(out_shape), std::move(out));
}

DenseTensor circular_permute(const DenseTensor& t, std::size_t shift) {
    return permute(t, PermVector::circular(t.order(), shift));
}

PermVector classic_unfold_perm(std::size_t order, std::size_t n) {
    if (n >= order) {
        throw std::out_of_range("mode " + std::to_string(n) + " out of range for order " +
                                std::to_string(order));
    }
    std::vector<std::size_t> e{n};
    for (std::size_t k = 0; k < order; ++k) {
        if (k != n) e.push_back(k);
    }
    return PermVector(std::move(e));
}

PermVector circular_unfold_perm(std::size_t order, std::size_t n) {
    if (n >= order) {
        throw std::out_of_range("mode " + std::to_string(n) + " out of range for order " +
                                std::to_string(order));
    }
    return PermVector::circular(order, n);
}

MatrixView unfold_general(const DenseTensor& t, const PermVector& v, std::size_t d) {
    if (d > t.order()) {
        throw std::out_of_range("row mode count " + std::to_string(d) +
                                " exceeds tensor order " + std::to_string(t.order()));
    }
    DenseTensor p = permute(t, v);
    std::size_t rows = 1;
    for (std::size_t j = 0; j < d; ++j) rows *= p.extent(j);
    const std::size_t cols = p.size() / rows;

    MatrixView out;
    out.matrix = Eigen::Map<const Matrix>(p.data().data(), static_cast<Eigen::Index>(rows),
                                          static_cast<Eigen::Index>(cols));
    out.spec = UnfoldSpec{t.shape(), v, d};
    return out;
}

MatrixView unfold_classic(const DenseTensor& t, std::size_t n) {
    return unfold_general(t, classic_unfold_perm(t.order(), n), 1);
}

MatrixView unfold_circular(const DenseTensor& t, std::size_t n) {
    return unfold_general(t, circular_unfold_perm(t.order(), n), 1);
}

DenseTensor fold_general(const Matrix& m, const Shape& shape, const PermVector& v,
                         std::size_t d) {
    if (v.size() != shape.size() || d > shape.size()) {
        throw std::invalid_argument("unfolding descriptor does not match target shape " +
                                    shape_string(shape));
    }
    Shape permuted(shape.size());
    std::size_t rows = 1;
    for (std::size_t j = 0; j < shape.size(); ++j) {
        permuted[j] = shape[v[j]];
        if (j < d) rows *= permuted[j];
    }
    const std::size_t total = element_count(shape);
    if (static_cast<std::size_t>(m.rows()) != rows ||
        static_cast<std::size_t>(m.rows() * m.cols()) != total) {
        throw std::invalid_argument("matrix of size " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " cannot fold into " +
                                    shape_string(shape) + " with " + std::to_string(d) +
                                    " row modes");
    }
    DenseTensor p(std::move(permuted), std::vector<double>(m.data(), m.data() + total));
    return permute(p, v.inverse());
}

DenseTensor fold(const MatrixView& m) {
    return fold_general(m.matrix, m.spec.source_shape, m.spec.perm, m.spec.row_modes);
}

DenseTensor fold_classic(const Matrix& m, const Shape& shape, std::size_t n) {
    return fold_general(m, shape, classic_unfold_perm(shape.size(), n), 1);
}

DenseTensor fold_circular(const Matrix& m, const Shape& shape, std::size_t n) {
    return fold_general(m, shape, circular_unfold_perm(shape.size(), n), 1);
}

// ---------------------------------------------------------------------------
// Contraction

namespace {

PermVector contraction_perm(std::size_t order, std::span<const std::size_t> dims,
                            const char* operand) {
    std::vector<bool> used(order, false);
    std::vector<std::size_t> e;
    e.reserve(order);
    for (std::size_t m : dims) {
        if (m >= order) {
            throw std::out_of_range(std::string("contraction mode ") + std::to_string(m) +
                                    " out of range for operand " + operand + " of order " +
                                    std::to_string(order));
        }
        if (used[m]) {
            throw std::invalid_argument(std::string("duplicate contraction mode ") +
                                        std::to_string(m) + " in operand " + operand);
        }
        used[m] = true;
        e.push_back(m);
    }
    for (std::size_t m = 0; m < order; ++m) {
        if (!used[m]) e.push_back(m);
    }
    return PermVector(std::move(e));
}

}  // namespace

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::size_t> dims_a, std::span<const std::size_t> dims_b) {
    if (dims_a.size() != dims_b.size() || dims_a.empty()) {
        throw std::invalid_argument("contraction needs equally many (>= 1) modes per operand, got " +
                                    std::to_string(dims_a.size()) + " and " +
                                    std::to_string(dims_b.size()));
    }
    for (std::size_t k = 0; k < dims_a.size(); ++k) {
        if (dims_a[k] < a.order() && dims_b[k] < b.order() &&
            a.extent(dims_a[k]) != b.extent(dims_b[k])) {
            throw std::invalid_argument(
                "contracted extents differ: mode " + std::to_string(dims_a[k]) + " of a has " +
                std::to_string(a.extent(dims_a[k])) + ", mode " + std::to_string(dims_b[k]) +
                " of b has " + std::to_string(b.extent(dims_b[k])));
        }
    }
    const std::size_t d = dims_a.size();
    const PermVector va = contraction_perm(a.order(), dims_a, "a");
    const PermVector vb = contraction_perm(b.order(), dims_b, "b");

    Shape out_shape;
    for (std::size_t j = d; j < va.size(); ++j) out_shape.push_back(a.extent(va[j]));
    for (std::size_t j = d; j < vb.size(); ++j) out_shape.push_back(b.extent(vb[j]));

    const MatrixView am = unfold_general(a, va, d);
    const MatrixView bm = unfold_general(b, vb, d);
    const Matrix prod = am.matrix.transpose() * bm.matrix;
    // Fold_[(1..M+N-2d); M-d] with the identity permutation is a reshape.
    return DenseTensor(std::move(out_shape),
                       std::vector<double>(prod.data(), prod.data() + prod.size()));
}

double frobenius_norm(const DenseTensor& t) {
    double s = 0.0;
    for (double x : t.data()) s += x * x;
    return std::sqrt(s);
}

double frobenius_distance(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("shape mismatch: " + shape_string(a.shape()) + " vs " +
                                    shape_string(b.shape()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) os << ',';
        os << shape[k];
    }
    os << ')';
    return os.str();
}

}  // namespace tsd
