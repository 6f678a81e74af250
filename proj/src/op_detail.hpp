#ifndef OPGRAPH_OP_DETAIL_HPP
#define OPGRAPH_OP_DETAIL_HPP

#include <string>
#include <vector>

#include "opgraph/field.hpp"

namespace opg::detail {

inline DType promote(DType a, DType b) {
    return (a == DType::complex128 || b == DType::complex128) ? DType::complex128
                                                              : DType::real64;
}

/// View of a field as [outer, n, inner] around axis k.
struct AxisSplit {
    std::size_t outer = 1, n = 1, inner = 1;
};

inline AxisSplit split_axis(const TypeInfo& t, std::size_t k) {
    AxisSplit s;
    for (std::size_t i = 0; i < k; ++i) s.outer *= t.axes[i].extent;
    s.n = t.axes[k].extent;
    for (std::size_t i = k + 1; i < t.axes.size(); ++i) s.inner *= t.axes[i].extent;
    return s;
}

/// Name-aligned broadcasting of a pattern onto an input: the output carries
/// the input axes followed by any pattern axes absent from the input.
struct BroadcastPlan {
    TypeInfo out;
    std::vector<std::size_t> x_stride; // per output axis; 0 where the input lacks it
    std::vector<std::size_t> m_stride; // per output axis; 0 where the pattern lacks it
};

BroadcastPlan make_broadcast(const TypeInfo& in, const TypeInfo& pattern,
                             const std::string& what);

} // namespace opg::detail

#endif
