#ifndef OPGRAPH_FIELD_HPP
#define OPGRAPH_FIELD_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "opgraph/errors.hpp"

namespace opg {

using cplx = std::complex<double>;

enum class DType { real64, complex128 };

inline const char* dtype_name(DType d) {
    return d == DType::real64 ? "real64" : "complex128";
}
DType dtype_from_name(const std::string& s);

struct Axis {
    std::string name;
    std::size_t extent = 0;
    bool operator==(const Axis& o) const { return name == o.name && extent == o.extent; }
};

/// Edge type annotation: ordered extents, dtype, opaque unit tag.
struct EdgeType {
    std::vector<std::size_t> shape;
    DType dtype = DType::real64;
    std::string units;
    bool operator==(const EdgeType& o) const {
        return shape == o.shape && dtype == o.dtype && units == o.units;
    }
    bool operator!=(const EdgeType& o) const { return !(*this == o); }
    std::string str() const;
};

/// Full static type of a field: named axes plus dtype and units. EdgeType is
/// the name-erased view used for edge comparisons.
struct TypeInfo {
    std::vector<Axis> axes;
    DType dtype = DType::real64;
    std::string units;

    std::size_t rank() const { return axes.size(); }
    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.extent;
        return n;
    }
    EdgeType edge_type() const {
        EdgeType t;
        for (const auto& a : axes) t.shape.push_back(a.extent);
        t.dtype = dtype;
        t.units = units;
        return t;
    }
    int axis_index(const std::string& name) const {
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i].name == name) return static_cast<int>(i);
        return -1;
    }
    bool operator==(const TypeInfo& o) const {
        return axes == o.axes && dtype == o.dtype && units == o.units;
    }
    std::string str() const;
};

/// Dense multi-axis array of real64 or complex128 values with named axes.
/// Storage is always complex; real64 fields keep imaginary parts exactly zero.
class Field {
public:
    Field() = default;
    explicit Field(TypeInfo type) : type_(std::move(type)), data_(type_.size(), cplx{0.0, 0.0}) {}

    static Field zeros(const TypeInfo& t) { return Field(t); }

    const TypeInfo& type() const { return type_; }
    const std::vector<Axis>& axes() const { return type_.axes; }
    DType dtype() const { return type_.dtype; }
    const std::string& units() const { return type_.units; }
    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return type_.rank(); }
    std::size_t extent(std::size_t i) const { return type_.axes[i].extent; }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    /// Row-major strides (last axis fastest).
    std::vector<std::size_t> strides() const;

    int axis_index(const std::string& name) const { return type_.axis_index(name); }

    void set_units(const std::string& u) { type_.units = u; }
    void set_dtype(DType d) { type_.dtype = d; }

    /// Throws DomainError if any entry is not finite.
    void check_finite(const std::string& what) const;
    /// True if every imaginary part is exactly zero.
    bool imag_is_zero() const;

    double norm2() const;       // Euclidean norm
    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    TypeInfo type_;
    std::vector<cplx> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Complex inner product sum_i a_i * conj(b_i).
cplx cdot(const Field& a, const Field& b);
/// Real inner product Re<a, b>.
double rdot(const Field& a, const Field& b);

/// Flat-loop odometer over a shape; fills `idx` in row-major order.
class Odometer {
public:
    explicit Odometer(std::vector<std::size_t> extents)
        : extents_(std::move(extents)), idx_(extents_.size(), 0) {
        done_ = false;
        for (auto e : extents_)
            if (e == 0) done_ = true;
    }
    bool done() const { return done_; }
    const std::vector<std::size_t>& idx() const { return idx_; }
    void next() {
        for (std::size_t k = extents_.size(); k-- > 0;) {
            if (++idx_[k] < extents_[k]) return;
            idx_[k] = 0;
        }
        done_ = true;
    }

private:
    std::vector<std::size_t> extents_;
    std::vector<std::size_t> idx_;
    bool done_;
};

} // namespace opg

#endif
