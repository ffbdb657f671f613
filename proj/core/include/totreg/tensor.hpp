#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace totreg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense order-D tensor over doubles. The flat layout is generalized
/// column-major: linear index = i_1 + i_2*p_1 + i_3*p_1*p_2 + ...
/// (0-based), so the mode-1 matricization is a plain reshape of the
/// flat array.
class DenseTensor {
public:
    DenseTensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(std::vector<Index> shape);

    /// Takes ownership of flat data; data.size() must equal the shape product.
    DenseTensor(std::vector<Index> shape, Vector data);

    /// 2-mode tensor from a matrix (shares the column-major layout).
    static DenseTensor from_matrix(const Matrix& m);

    Index order() const { return static_cast<Index>(shape_.size()); }
    Index extent(Index k) const { return shape_[static_cast<size_t>(k)]; }
    Index size() const { return data_.size(); }
    const std::vector<Index>& shape() const { return shape_; }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }
    double operator[](Index flat) const { return data_[flat]; }
    double& operator[](Index flat) { return data_[flat]; }

    /// View as a matrix with the first `lead_modes` modes flattened into rows.
    Eigen::Map<const Matrix> reshaped(Index lead_modes) const;

    bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

    DenseTensor& operator+=(const DenseTensor& rhs);
    DenseTensor& operator-=(const DenseTensor& rhs);
    DenseTensor& operator*=(double s);
    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }
    friend DenseTensor operator*(DenseTensor a, double s) { return a *= s; }

private:
    std::vector<Index> shape_;
    Vector data_;
};

/// Mode-k unfolding (0-based modes). Row index is i_k; the column index
/// runs column-major over the remaining modes in increasing mode order.
Matrix matricize(const DenseTensor& t, Index k);

/// Inverse of matricize for the given target shape.
DenseTensor tensorize(const Matrix& m, Index k, const std::vector<Index>& shape);

/// Mode-k product t x_k b: replaces extent p_k by rows(b); requires
/// cols(b) == p_k. Satisfies M_k(t x_k b) = b * M_k(t).
DenseTensor mode_product(const DenseTensor& t, const Matrix& b, Index k);

/// Applies b_j along mode j for every (j, b_j) pair, ascending j.
DenseTensor multi_mode_product(const DenseTensor& t,
                               const std::vector<const Matrix*>& factors);

/// Contraction of an order-d tensor a against the first d modes of x
/// (order d+m). Result has shape (p_{d+1},...,p_{d+m}); shape {1} when m=0.
DenseTensor contracted_inner(const DenseTensor& a, const DenseTensor& x);

double inner(const DenseTensor& x, const DenseTensor& y);
double frob_norm(const DenseTensor& x);

} // namespace totreg
