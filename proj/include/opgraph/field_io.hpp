#ifndef OPGRAPH_FIELD_IO_HPP
#define OPGRAPH_FIELD_IO_HPP

#include <iosfwd>
#include <string>

#include "opgraph/field.hpp"

namespace opg {

/// Field file format: one text header line
///   opgfield v1 dtype=<real64|complex128> units=<quoted> axes=<name>:<extent>[,...]
/// followed by the flat row-major payload as little-endian float64
/// (real64: one value per entry; complex128: re,im pairs).
void write_field(std::ostream& os, const Field& f);
void write_field_file(const std::string& path, const Field& f);

Field read_field(std::istream& is);
Field read_field_file(const std::string& path);

} // namespace opg

#endif
