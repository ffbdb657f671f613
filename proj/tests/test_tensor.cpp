#include <doctest.h>

#include <totreg/rng.hpp>
#include <totreg/tensor.hpp>

#include <cmath>
#include <vector>

using namespace totreg;

namespace {

DenseTensor random_tensor(Rng& rng, const std::vector<Index>& shape) {
    DenseTensor t(shape);
    for (Index f = 0; f < t.size(); ++f) t[f] = rng.normal();
    return t;
}

// Index-map oracle for the unfolding: computes the (row, col) position of a
// multi-index directly from the layout formula, independent of matricize.
std::pair<Index, Index> unfold_position(const std::vector<Index>& idx,
                                        const std::vector<Index>& shape,
                                        Index k) {
    Index col = 0, stride = 1;
    for (size_t l = 0; l < shape.size(); ++l) {
        if (static_cast<Index>(l) == k) continue;
        col += idx[l] * stride;
        stride *= shape[l];
    }
    return {idx[static_cast<size_t>(k)], col};
}

Index flat_index(const std::vector<Index>& idx, const std::vector<Index>& shape) {
    Index f = 0, stride = 1;
    for (size_t l = 0; l < shape.size(); ++l) {
        f += idx[l] * stride;
        stride *= shape[l];
    }
    return f;
}

// Iterates every multi-index of the shape.
template <typename Fn>
void for_each_index(const std::vector<Index>& shape, Fn fn) {
    std::vector<Index> idx(shape.size(), 0);
    for (;;) {
        fn(idx);
        size_t l = 0;
        for (; l < shape.size(); ++l) {
            if (++idx[l] < shape[l]) break;
            idx[l] = 0;
        }
        if (l == shape.size()) return;
    }
}

} // namespace

TEST_CASE("tensor construction validates shape") {
    CHECK_THROWS_AS(DenseTensor(std::vector<Index>{}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor({2, 3}, Vector::Zero(5)), std::invalid_argument);
    DenseTensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(frob_norm(t) == 0.0);
}

TEST_CASE("matricize of an order-2 tensor is the matrix / its transpose") {
    Rng rng(7);
    Matrix m(3, 4);
    for (Index j = 0; j < 4; ++j)
        for (Index i = 0; i < 3; ++i) m(i, j) = rng.normal();
    DenseTensor t = DenseTensor::from_matrix(m);
    CHECK((matricize(t, 0) - m).norm() == 0.0);
    CHECK((matricize(t, 1) - m.transpose()).norm() == 0.0);
}

TEST_CASE("matricize matches the index-map oracle on a 2x3x2 tensor") {
    Rng rng(11);
    std::vector<Index> shape{2, 3, 2};
    DenseTensor t = random_tensor(rng, shape);
    for (Index k = 0; k < 3; ++k) {
        Matrix m = matricize(t, k);
        for_each_index(shape, [&](const std::vector<Index>& idx) {
            auto [row, col] = unfold_position(idx, shape, k);
            CHECK(m(row, col) == t[flat_index(idx, shape)]);
        });
    }
    CHECK_THROWS_AS(matricize(t, 3), std::invalid_argument);
    CHECK_THROWS_AS(matricize(t, -1), std::invalid_argument);
}

TEST_CASE("tensorize inverts matricize exactly on every mode") {
    Rng rng(13);
    for (auto shape : {std::vector<Index>{4}, {2, 3}, {2, 3, 2}, {3, 2, 4, 2}}) {
        DenseTensor t = random_tensor(rng, shape);
        for (Index k = 0; k < t.order(); ++k) {
            DenseTensor back = tensorize(matricize(t, k), k, shape);
            CHECK((back.data() - t.data()).norm() == 0.0); // bit-exact round trip
        }
    }
    DenseTensor t({2, 3});
    CHECK_THROWS_AS(tensorize(Matrix::Zero(3, 3), 0, {2, 3}), std::invalid_argument);
}

TEST_CASE("mode product: identity, matrix case, and summation oracle") {
    Rng rng(17);
    DenseTensor t = random_tensor(rng, {2, 2, 2});

    for (Index k = 0; k < 3; ++k) {
        DenseTensor same = mode_product(t, Matrix::Identity(2, 2), k);
        CHECK((same.data() - t.data()).norm() == 0.0);
    }

    // Order-2: mode-1 product is a plain matrix product.
    Matrix m(2, 3);
    for (Index i = 0; i < m.size(); ++i) m(i % 2, i / 2) = rng.normal();
    DenseTensor t2 = DenseTensor::from_matrix(m);
    Matrix b(4, 2);
    for (Index i = 0; i < b.size(); ++i) b(i % 4, i / 4) = rng.normal();
    DenseTensor prod = mode_product(t2, b, 0);
    CHECK((matricize(prod, 0) - b * m).norm() < 1e-14 * b.norm() * m.norm());

    // Triple-loop oracle on mode 2 (middle-mode stride handling).
    Matrix c(3, 2);
    for (Index i = 0; i < c.size(); ++i) c(i % 3, i / 3) = rng.normal();
    DenseTensor out = mode_product(t, c, 1);
    REQUIRE(out.shape() == std::vector<Index>{2, 3, 2});
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j)
            for (Index l = 0; l < 2; ++l) {
                double expect = 0;
                for (Index s = 0; s < 2; ++s)
                    expect += c(j, s) * t[flat_index({i, s, l}, {2, 2, 2})];
                CHECK(out[flat_index({i, j, l}, {2, 3, 2})] ==
                      doctest::Approx(expect).epsilon(1e-13));
            }

    CHECK_THROWS_AS(mode_product(t, Matrix::Zero(2, 3), 0), std::invalid_argument);
}

TEST_CASE("mode product / matricization compatibility on random instances") {
    Rng rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        DenseTensor t = random_tensor(rng, {3, 4, 2});
        Index k = static_cast<Index>(rng.next_u64() % 3);
        Index rows = 2 + static_cast<Index>(rng.next_u64() % 3);
        Matrix b(rows, t.extent(k));
        for (Index i = 0; i < b.size(); ++i) b(i % rows, i / rows) = rng.normal();
        Matrix lhs = matricize(mode_product(t, b, k), k);
        Matrix rhs = b * matricize(t, k);
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("mode products along distinct modes commute") {
    Rng rng(23);
    DenseTensor t = random_tensor(rng, {3, 2, 4});
    Matrix a(5, 3), b(2, 4);
    for (Index i = 0; i < a.size(); ++i) a(i % 5, i / 5) = rng.normal();
    for (Index i = 0; i < b.size(); ++i) b(i % 2, i / 2) = rng.normal();
    DenseTensor lhs = mode_product(mode_product(t, a, 0), b, 2);
    DenseTensor rhs = mode_product(mode_product(t, b, 2), a, 0);
    CHECK(frob_norm(lhs - rhs) <= 1e-12 * std::max(1.0, frob_norm(lhs)));
}

TEST_CASE("contracted inner product") {
    Rng rng(29);

    // m = 0 collapses to the Euclidean inner product.
    DenseTensor a = random_tensor(rng, {2, 3});
    DenseTensor x = random_tensor(rng, {2, 3});
    DenseTensor s = contracted_inner(a, x);
    REQUIRE(s.shape() == std::vector<Index>{1});
    CHECK(s[0] == doctest::Approx(inner(a, x)).epsilon(1e-14));

    // Zero contractor annihilates.
    DenseTensor z({2, 3});
    DenseTensor big = random_tensor(rng, {2, 3, 4});
    CHECK(frob_norm(contracted_inner(z, big)) == 0.0);

    // d = 1, m = 1 is a matrix-vector product.
    DenseTensor v = random_tensor(rng, {2});
    DenseTensor mx = random_tensor(rng, {2, 3});
    DenseTensor r = contracted_inner(v, mx);
    Eigen::Map<const Matrix> mm(mx.data().data(), 2, 3);
    Vector expect = mm.transpose() * v.data();
    CHECK((r.data() - expect).norm() < 1e-14);

    CHECK_THROWS_AS(contracted_inner(random_tensor(rng, {3}), mx),
                    std::invalid_argument);
}

TEST_CASE("inner and frobenius norm") {
    Rng rng(31);
    DenseTensor ones({2, 2, 2}, Vector::Ones(8));
    CHECK(frob_norm(ones) == doctest::Approx(std::sqrt(8.0)));

    DenseTensor x = random_tensor(rng, {3, 3});
    DenseTensor z({3, 3});
    CHECK(inner(x, z) == 0.0);
    CHECK_THROWS_AS(inner(x, random_tensor(rng, {3, 2})), std::invalid_argument);

    for (int rep = 0; rep < 10; ++rep) {
        DenseTensor u = random_tensor(rng, {4, 2});
        DenseTensor v = random_tensor(rng, {4, 2});
        CHECK(std::abs(inner(u, v)) <= frob_norm(u) * frob_norm(v) + 1e-12);
    }
}

TEST_CASE("reshaped view flattens leading modes") {
    Rng rng(37);
    DenseTensor t = random_tensor(rng, {2, 3, 4});
    auto view = t.reshaped(2);
    CHECK(view.rows() == 6);
    CHECK(view.cols() == 4);
    CHECK(view(0, 0) == t[0]);
    CHECK(view(5, 3) == t[t.size() - 1]);
}

TEST_CASE("seed mixing is order-sensitive and stable") {
    CHECK(combine_seed(1, {2, 3}) != combine_seed(1, {3, 2}));
    CHECK(combine_seed(1, {2, 3}) == combine_seed(1, {2, 3}));
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    Rng c = a.split(1), d = a.split(2);
    CHECK(c.normal() != d.normal());
}
