#include "test_util.hpp"

#include "tsd/tensor.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace tsd;
using tsd::testing::for_each_index;
using tsd::testing::offset_of;
using tsd::testing::random_shape;
using tsd::testing::random_tensor;

namespace {

std::vector<std::size_t> take(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& modes) {
    std::vector<std::size_t> out;
    for (auto m : modes) out.push_back(idx[m]);
    return out;
}

Shape take_shape(const Shape& s, const std::vector<std::size_t>& modes) {
    Shape out;
    for (auto m : modes) out.push_back(s[m]);
    return out;
}

/// Entry (r, c) of the [v; d] unfolding by the defining index formula.
void check_unfolding(const DenseTensor& t, const Matrix& m, const std::vector<std::size_t>& v,
                     std::size_t d) {
    const std::vector<std::size_t> rows(v.begin(), v.begin() + static_cast<long>(d));
    const std::vector<std::size_t> cols(v.begin() + static_cast<long>(d), v.end());
    const Shape rs = take_shape(t.shape(), rows), cs = take_shape(t.shape(), cols);
    ASSERT_EQ(static_cast<std::size_t>(m.rows()), element_count(rs));
    ASSERT_EQ(static_cast<std::size_t>(m.cols()), element_count(cs));
    for_each_index(t.shape(), [&](const std::vector<std::size_t>& idx) {
        const auto r = offset_of(take(idx, rows), rs);
        const auto c = offset_of(take(idx, cols), cs);
        ASSERT_EQ(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                  t[offset_of(idx, t.shape())]);
    });
}

}  // namespace

TEST(DenseTensor, ColumnMajorStorage) {
    DenseTensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(t({1, 0}), 2);
    EXPECT_EQ(t({0, 1}), 3);
    EXPECT_EQ(t({1, 2}), 6);
}

TEST(DenseTensor, RejectsInvalidConstruction) {
    EXPECT_THROW(DenseTensor({2, 3}, {1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(DenseTensor(Shape{2, 0}), std::invalid_argument);
}

TEST(DenseTensor, ScalarHasOrderZero) {
    const auto s = DenseTensor::scalar(4.5);
    EXPECT_EQ(s.order(), 0u);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], 4.5);
}

TEST(DenseTensor, IndexOutOfRangeThrows) {
    DenseTensor t(Shape{2, 3});
    EXPECT_THROW((void)t({2, 0}), std::out_of_range);
    EXPECT_THROW((void)t({0}), std::out_of_range);
}

TEST(PermVector, RejectsNonBijection) {
    EXPECT_THROW(PermVector({0, 0, 1}), std::invalid_argument);
    EXPECT_THROW(PermVector({0, 3, 1}), std::invalid_argument);
}

TEST(PermVector, CircularAndInverse) {
    const auto c = PermVector::circular(4, 1);
    EXPECT_EQ(c, PermVector({1, 2, 3, 0}));
    EXPECT_EQ(c.circular_shift(), 1);
    EXPECT_EQ(c.inverse(), PermVector({3, 0, 1, 2}));
    EXPECT_TRUE(PermVector::identity(3).is_identity());
    EXPECT_EQ(PermVector({1, 0, 2}).circular_shift(), -1);
}

TEST(Permute, IdentityCopies) {
    std::mt19937_64 rng(1);
    const auto t = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(permute(t, PermVector::identity(3)), t);
}

TEST(Permute, MatrixTranspose) {
    DenseTensor m({2, 3}, {1, 2, 3, 4, 5, 6});
    const auto p = permute(m, {1, 0});
    ASSERT_EQ(p.shape(), (Shape{3, 2}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(p({j, i}), m({i, j}));
}

TEST(Permute, MatchesIndexRemapOracle) {
    std::mt19937_64 rng(2);
    const auto t = random_tensor({2, 3, 4}, rng);
    const PermVector v{2, 0, 1};
    const auto p = permute(t, v);
    ASSERT_EQ(p.shape(), (Shape{4, 2, 3}));
    for_each_index(t.shape(), [&](const std::vector<std::size_t>& i) {
        EXPECT_EQ(p({i[2], i[0], i[1]}), t({i[0], i[1], i[2]}));
    });
}

TEST(Permute, LengthMismatchThrows) {
    EXPECT_THROW((void)permute(DenseTensor(Shape{2, 2}), PermVector::identity(3)),
                 std::invalid_argument);
}

TEST(Permute, InverseRestoresExactly) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t order = 1 + trial % 6;
        const auto t = random_tensor(random_shape(order, 4, rng), rng);
        std::vector<std::size_t> e(order);
        std::iota(e.begin(), e.end(), 0);
        std::shuffle(e.begin(), e.end(), rng);
        const PermVector v(e);
        EXPECT_EQ(permute(permute(t, v), v.inverse()), t);
    }
}

TEST(CircularPermute, ShiftZeroIsIdentity) {
    std::mt19937_64 rng(4);
    const auto t = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(circular_permute(t, 0), t);
}

TEST(CircularPermute, OrderManySingleShiftsIsIdentity) {
    std::mt19937_64 rng(5);
    const auto t = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(circular_permute(circular_permute(circular_permute(t, 1), 1), 1), t);
}

TEST(CircularPermute, MatchesExplicitPermutation) {
    std::mt19937_64 rng(6);
    const auto t = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(circular_permute(t, 2), permute(t, {2, 0, 1}));
}

TEST(CircularPermute, ShiftOutOfRangeThrows) {
    EXPECT_THROW((void)circular_permute(DenseTensor(Shape{2, 2, 2}), 3), std::out_of_range);
}

TEST(UnfoldClassic, MatrixCases) {
    std::mt19937_64 rng(7);
    const auto m = random_tensor({3, 5}, rng);
    const Matrix a = Eigen::Map<const Matrix>(m.data().data(), 3, 5);
    EXPECT_EQ(unfold_classic(m, 0).matrix, a);
    EXPECT_EQ(unfold_classic(m, 1).matrix, Matrix(a.transpose()));
}

TEST(UnfoldClassic, IndexFormula) {
    std::mt19937_64 rng(8);
    const auto t = random_tensor({2, 3, 4}, rng);
    check_unfolding(t, unfold_classic(t, 0).matrix, {0, 1, 2}, 1);
    check_unfolding(t, unfold_classic(t, 1).matrix, {1, 0, 2}, 1);
    check_unfolding(t, unfold_classic(t, 2).matrix, {2, 0, 1}, 1);
}

TEST(UnfoldClassic, ModeOutOfRangeThrows) {
    EXPECT_THROW((void)unfold_classic(DenseTensor(Shape{2, 2}), 2), std::out_of_range);
}

TEST(UnfoldCircular, FirstModeEqualsClassic) {
    std::mt19937_64 rng(9);
    const auto t = random_tensor({3, 2, 4, 2}, rng);
    EXPECT_EQ(unfold_circular(t, 0).matrix, unfold_classic(t, 0).matrix);
}

TEST(UnfoldCircular, MatrixSecondModeIsTranspose) {
    std::mt19937_64 rng(10);
    const auto m = random_tensor({3, 5}, rng);
    const Matrix a = Eigen::Map<const Matrix>(m.data().data(), 3, 5);
    EXPECT_EQ(unfold_circular(m, 1).matrix, Matrix(a.transpose()));
}

TEST(UnfoldCircular, IndexFormula) {
    std::mt19937_64 rng(11);
    const auto t = random_tensor({2, 3, 4}, rng);
    check_unfolding(t, unfold_circular(t, 1).matrix, {1, 2, 0}, 1);
    check_unfolding(t, unfold_circular(t, 2).matrix, {2, 0, 1}, 1);
}

TEST(UnfoldGeneral, ColumnVectorizationIsStorageOrder) {
    std::mt19937_64 rng(12);
    const auto t = random_tensor({2, 3, 4}, rng);
    const auto m = unfold_general(t, PermVector::identity(3), 3);
    ASSERT_EQ(m.cols(), 1);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(m.matrix(static_cast<Eigen::Index>(i), 0), t[i]);
}

TEST(UnfoldGeneral, RowVectorizationIsStorageOrder) {
    std::mt19937_64 rng(13);
    const auto t = random_tensor({2, 3, 4}, rng);
    const auto m = unfold_general(t, PermVector::identity(3), 0);
    ASSERT_EQ(m.rows(), 1);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(m.matrix(0, static_cast<Eigen::Index>(i)), t[i]);
}

TEST(UnfoldGeneral, IdentityFirstModeEqualsClassic) {
    std::mt19937_64 rng(14);
    const auto t = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(unfold_general(t, PermVector::identity(3), 1).matrix, unfold_classic(t, 0).matrix);
}

TEST(UnfoldGeneral, IndexFormula) {
    std::mt19937_64 rng(15);
    const auto t = random_tensor({2, 3, 4}, rng);
    check_unfolding(t, unfold_general(t, {1, 2, 0}, 2).matrix, {1, 2, 0}, 2);
}

TEST(UnfoldGeneral, InvalidDescriptorThrows) {
    const DenseTensor t(Shape{2, 3, 4});
    EXPECT_THROW((void)unfold_general(t, PermVector::identity(3), 4), std::out_of_range);
    EXPECT_THROW((void)unfold_general(t, PermVector::identity(2), 1), std::invalid_argument);
}

TEST(Fold, ClassicRoundTrip) {
    std::mt19937_64 rng(16);
    const auto t = random_tensor({3, 4, 5}, rng);
    EXPECT_EQ(fold_classic(unfold_classic(t, 1).matrix, t.shape(), 1), t);
}

TEST(Fold, GeneralRoundTrip) {
    std::mt19937_64 rng(17);
    const auto t = random_tensor({2, 3, 4}, rng);
    const PermVector v{1, 2, 0};
    EXPECT_EQ(fold_general(unfold_general(t, v, 2).matrix, t.shape(), v, 2), t);
    EXPECT_EQ(fold(unfold_general(t, PermVector::identity(3), 3)), t);
}

TEST(Fold, ExtentMismatchThrows) {
    EXPECT_THROW((void)fold_classic(Matrix::Zero(3, 4), Shape{3, 5}, 0), std::invalid_argument);
}

TEST(Fold, RoundTripEveryKindUpToOrderSix) {
    std::mt19937_64 rng(18);
    for (std::size_t order = 1; order <= 6; ++order) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto t = random_tensor(random_shape(order, 3, rng), rng);
            for (std::size_t n = 0; n < order; ++n) {
                EXPECT_EQ(fold(unfold_classic(t, n)), t);
                EXPECT_EQ(fold(unfold_circular(t, n)), t);
                EXPECT_EQ(fold_circular(unfold_circular(t, n).matrix, t.shape(), n), t);
            }
            std::vector<std::size_t> e(order);
            std::iota(e.begin(), e.end(), 0);
            std::shuffle(e.begin(), e.end(), rng);
            const PermVector v(e);
            for (std::size_t d = 0; d <= order; ++d) EXPECT_EQ(fold(unfold_general(t, v, d)), t);
        }
    }
}

TEST(Contract, MatrixProduct) {
    std::mt19937_64 rng(19);
    const auto a = random_tensor({2, 3}, rng);
    const auto b = random_tensor({3, 2}, rng);
    const auto c = contract(a, b, {1}, {0});
    const Matrix ma = Eigen::Map<const Matrix>(a.data().data(), 2, 3);
    const Matrix mb = Eigen::Map<const Matrix>(b.data().data(), 3, 2);
    const Matrix expected = ma * mb;
    ASSERT_EQ(c.shape(), (Shape{2, 2}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_NEAR(c({i, j}), expected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1e-14);
}

TEST(Contract, FullSelfContractionIsSquaredNorm) {
    std::mt19937_64 rng(20);
    const auto t = random_tensor({2, 3, 4}, rng);
    const auto s = contract(t, t, {0, 1, 2}, {0, 1, 2});
    EXPECT_EQ(s.order(), 0u);
    double sum = 0;
    for (double v : t.data()) sum += v * v;
    EXPECT_NEAR(s[0], sum, 1e-12 * sum);
}

TEST(Contract, MatchesNestedLoopOracle) {
    std::mt19937_64 rng(21);
    const auto a = random_tensor({2, 3, 4}, rng);
    const auto b = random_tensor({3, 5, 2}, rng);
    const auto c = contract(a, b, {0, 1}, {2, 0});
    ASSERT_EQ(c.shape(), (Shape{4, 5}));
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t m = 0; m < 5; ++m) {
            double s = 0;
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 3; ++j) s += a({i, j, k}) * b({j, m, i});
            EXPECT_NEAR(c({k, m}), s, 1e-12 * std::max(1.0, std::abs(s)));
        }
}

TEST(Contract, RandomOperandsAgreeWithDefinition) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t ma = 1 + rng() % 4, mb = 1 + rng() % 4;
        const std::size_t d = 1 + rng() % std::min(ma, mb);
        if (ma + mb > 7) continue;
        Shape sa = random_shape(ma, 3, rng), sb = random_shape(mb, 3, rng);
        std::vector<std::size_t> pa(ma), pb(mb);
        std::iota(pa.begin(), pa.end(), 0);
        std::iota(pb.begin(), pb.end(), 0);
        std::shuffle(pa.begin(), pa.end(), rng);
        std::shuffle(pb.begin(), pb.end(), rng);
        std::vector<std::size_t> da(pa.begin(), pa.begin() + static_cast<long>(d));
        std::vector<std::size_t> db(pb.begin(), pb.begin() + static_cast<long>(d));
        for (std::size_t j = 0; j < d; ++j) sb[db[j]] = sa[da[j]];
        const auto a = random_tensor(sa, rng), b = random_tensor(sb, rng);
        const auto c = contract(a, b, da, db);

        std::vector<std::size_t> ra, rb;
        for (std::size_t m = 0; m < ma; ++m)
            if (std::find(da.begin(), da.end(), m) == da.end()) ra.push_back(m);
        for (std::size_t m = 0; m < mb; ++m)
            if (std::find(db.begin(), db.end(), m) == db.end()) rb.push_back(m);
        Shape out = take_shape(sa, ra);
        for (auto m : rb) out.push_back(sb[m]);
        ASSERT_EQ(c.shape(), out);

        DenseTensor expected(out);
        for_each_index(sa, [&](const std::vector<std::size_t>& ia) {
            for_each_index(sb, [&](const std::vector<std::size_t>& ib) {
                for (std::size_t j = 0; j < d; ++j)
                    if (ia[da[j]] != ib[db[j]]) return;
                std::vector<std::size_t> io = take(ia, ra);
                for (auto m : rb) io.push_back(ib[m]);
                expected[offset_of(io, out)] += a[offset_of(ia, sa)] * b[offset_of(ib, sb)];
            });
        });
        EXPECT_LE(frobenius_distance(c, expected), 1e-12 * std::max(1.0, frobenius_norm(expected)));
    }
}

TEST(Contract, OperandOrderChangesShape) {
    const DenseTensor a(Shape{2, 3}), b(Shape{3, 5});
    EXPECT_EQ(contract(a, b, {1}, {0}).shape(), (Shape{2, 5}));
    EXPECT_EQ(contract(b, a, {0}, {1}).shape(), (Shape{5, 2}));
}

TEST(Contract, InvalidArgumentsThrow) {
    const DenseTensor a(Shape{2, 3}), b(Shape{3, 2});
    EXPECT_THROW((void)contract(a, b, {0, 1}, {0}), std::invalid_argument);
    EXPECT_THROW((void)contract(a, b, {0}, {0}), std::invalid_argument);
    EXPECT_THROW((void)contract(a, b, {1, 1}, {0, 1}), std::invalid_argument);
    EXPECT_THROW((void)contract(a, b, {}, {}), std::invalid_argument);
}

TEST(FrobeniusNorm, Cases) {
    EXPECT_EQ(frobenius_norm(DenseTensor(Shape{3, 3})), 0.0);
    EXPECT_EQ(frobenius_norm(DenseTensor({1}, {3.0})), 3.0);
    std::mt19937_64 rng(23);
    const auto t = random_tensor({4, 4, 4}, rng);
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t k = 0; k < 4; ++k) s += t({i, j, k}) * t({i, j, k});
    EXPECT_NEAR(frobenius_norm(t), std::sqrt(s), 1e-13);
}
