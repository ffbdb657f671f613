#include "totreg/tensor.hpp"

#include <numeric>
#include <stdexcept>

namespace totreg {

namespace {

Index shape_product(const std::vector<Index>& shape) {
    if (shape.empty())
        throw std::invalid_argument("tensor shape must have at least one mode");
    Index n = 1;
    for (Index p : shape) {
        if (p < 1) throw std::invalid_argument("tensor extents must be >= 1");
        n *= p;
    }
    return n;
}

} // namespace

DenseTensor::DenseTensor(std::vector<Index> shape)
    : shape_(std::move(shape)), data_(Vector::Zero(shape_product(shape_))) {}

DenseTensor::DenseTensor(std::vector<Index> shape, Vector data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_))
        throw std::invalid_argument("tensor data length does not match shape");
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
    Vector flat = Eigen::Map<const Vector>(m.data(), m.size());
    return DenseTensor({m.rows(), m.cols()}, std::move(flat));
}

Eigen::Map<const Matrix> DenseTensor::reshaped(Index lead_modes) const {
    Index rows = 1;
    for (Index k = 0; k < lead_modes; ++k) rows *= extent(k);
    return Eigen::Map<const Matrix>(data_.data(), rows, size() / rows);
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& rhs) {
    if (!same_shape(rhs)) throw std::invalid_argument("shape mismatch in tensor add");
    data_ += rhs.data_;
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& rhs) {
    if (!same_shape(rhs)) throw std::invalid_argument("shape mismatch in tensor subtract");
    data_ -= rhs.data_;
    return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
    data_ *= s;
    return *this;
}

Matrix matricize(const DenseTensor& t, Index k) {
    const Index d = t.order();
    if (k < 0 || k >= d) throw std::invalid_argument("matricize: mode index out of range");
    const Index pk = t.extent(k);
    const Index cols = t.size() / pk;

    Index stride = 1; // product of extents of modes before k
    for (Index l = 0; l < k; ++l) stride *= t.extent(l);

    Matrix out(pk, cols);
    if (k == 0) {
        out = Eigen::Map<const Matrix>(t.data().data(), pk, cols);
        return out;
    }
    // For flat index f: i_k = (f / stride) % pk and the unfolded column is
    // (f % stride) + (f / (stride * pk)) * stride.
    const Index block = stride * pk;
    const Index outer = t.size() / block;
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < pk; ++i) {
            out.block(i, o * stride, 1, stride) =
                t.data().segment(o * block + i * stride, stride).transpose();
        }
    }
    return out;
}

DenseTensor tensorize(const Matrix& m, Index k, const std::vector<Index>& shape) {
    const Index d = static_cast<Index>(shape.size());
    if (k < 0 || k >= d) throw std::invalid_argument("tensorize: mode index out of range");
    const Index pk = shape[static_cast<size_t>(k)];
    Index total = 1;
    for (Index p : shape) total *= p;
    if (m.rows() != pk || m.cols() != total / pk)
        throw std::invalid_argument("tensorize: matrix dimensions do not match shape");

    DenseTensor out(shape);
    Index stride = 1;
    for (Index l = 0; l < k; ++l) stride *= shape[static_cast<size_t>(l)];
    if (k == 0) {
        out.data() = Eigen::Map<const Vector>(m.data(), m.size());
        return out;
    }
    const Index block = stride * pk;
    const Index outer = total / block;
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < pk; ++i) {
            out.data().segment(o * block + i * stride, stride) =
                m.block(i, o * stride, 1, stride).transpose();
        }
    }
    return out;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& b, Index k) {
    const Index d = t.order();
    if (k < 0 || k >= d) throw std::invalid_argument("mode_product: mode index out of range");
    if (b.cols() != t.extent(k))
        throw std::invalid_argument("mode_product: matrix columns must match tensor extent");

    std::vector<Index> out_shape = t.shape();
    out_shape[static_cast<size_t>(k)] = b.rows();
    DenseTensor out(out_shape);

    Index stride = 1;
    for (Index l = 0; l < k; ++l) stride *= t.extent(l);
    const Index pk = t.extent(k);
    const Index rk = b.rows();
    const Index block_in = stride * pk;
    const Index block_out = stride * rk;
    const Index outer = t.size() / block_in;

    if (k == 0) {
        Eigen::Map<const Matrix> in(t.data().data(), pk, t.size() / pk);
        Eigen::Map<Matrix> o(out.data().data(), rk, t.size() / pk);
        o.noalias() = b * in;
        return out;
    }
    for (Index o = 0; o < outer; ++o) {
        Eigen::Map<const Matrix> in(t.data().data() + o * block_in, stride, pk);
        Eigen::Map<Matrix> ob(out.data().data() + o * block_out, stride, rk);
        ob.noalias() = in * b.transpose();
    }
    return out;
}

DenseTensor multi_mode_product(const DenseTensor& t,
                               const std::vector<const Matrix*>& factors) {
    if (static_cast<Index>(factors.size()) != t.order())
        throw std::invalid_argument("multi_mode_product: one factor per mode required");
    DenseTensor out = t;
    for (Index k = 0; k < t.order(); ++k) {
        if (factors[static_cast<size_t>(k)] != nullptr)
            out = mode_product(out, *factors[static_cast<size_t>(k)], k);
    }
    return out;
}

DenseTensor contracted_inner(const DenseTensor& a, const DenseTensor& x) {
    const Index d = a.order();
    if (x.order() < d)
        throw std::invalid_argument("contracted_inner: x must have at least order(a) modes");
    for (Index k = 0; k < d; ++k) {
        if (a.extent(k) != x.extent(k))
            throw std::invalid_argument("contracted_inner: leading extents of x must match a");
    }
    const Index m = x.order() - d;
    const Index q = a.size();
    const Index mprod = x.size() / q;
    // Leading d modes are contiguous in the column-major layout.
    Eigen::Map<const Matrix> xm(x.data().data(), q, mprod);
    Vector res = xm.transpose() * a.data();
    if (m == 0) return DenseTensor({1}, std::move(res));
    std::vector<Index> shape(x.shape().begin() + d, x.shape().end());
    return DenseTensor(shape, std::move(res));
}

double inner(const DenseTensor& x, const DenseTensor& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("inner: shape mismatch");
    return x.data().dot(y.data());
}

double frob_norm(const DenseTensor& x) { return x.data().norm(); }

} // namespace totreg
