#include "opgraph/field.hpp"

#include <cmath>
#include <sstream>

namespace opg {

DType dtype_from_name(const std::string& s) {
    if (s == "real64") return DType::real64;
    if (s == "complex128") return DType::complex128;
    throw ParseError("unknown dtype '" + s + "'");
}

std::string EdgeType::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ", " << dtype_name(dtype) << ", \"" << units << "\")";
    return os.str();
}

std::string TypeInfo::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < axes.size(); ++i)
        os << (i ? "," : "") << axes[i].name << ":" << axes[i].extent;
    os << "; " << dtype_name(dtype) << "; \"" << units << "\")";
    return os.str();
}

std::vector<std::size_t> Field::strides() const {
    std::vector<std::size_t> s(type_.axes.size(), 1);
    for (std::size_t i = type_.axes.size(); i-- > 1;)
        s[i - 1] = s[i] * type_.axes[i].extent;
    return s;
}

void Field::check_finite(const std::string& what) const {
    for (const auto& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("non-finite value in " + what);
    }
}

bool Field::imag_is_zero() const {
    for (const auto& v : data_)
        if (v.imag() != 0.0) return false;
    return true;
}

double Field::norm2() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

Field& Field::operator+=(const Field& o) {
    if (o.size() != size()) throw TypeError("field sum: size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (o.size() != size()) throw TypeError("field difference: size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

cplx cdot(const Field& a, const Field& b) {
    if (a.size() != b.size()) throw TypeError("inner product: size mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

double rdot(const Field& a, const Field& b) { return cdot(a, b).real(); }

} // namespace opg
