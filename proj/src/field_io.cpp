#include "opgraph/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace opg {

namespace {

static_assert(sizeof(double) == 8, "binary field format requires 64-bit doubles");

void put_le_double(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((u >> (8 * i)) & 0xff);
        u = r;
    }
    char buf[8];
    std::memcpy(buf, &u, 8);
    os.write(buf, 8);
}

double get_le_double(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    if (!is) throw ParseError("field file: truncated payload");
    std::uint64_t u;
    std::memcpy(&u, buf, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((u >> (8 * i)) & 0xff);
        u = r;
    }
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace

void write_field(std::ostream& os, const Field& f) {
    os << "opgfield v1 dtype=" << dtype_name(f.dtype()) << " units=\"" << f.units()
       << "\" axes=";
    for (std::size_t i = 0; i < f.axes().size(); ++i) {
        if (i) os << ",";
        os << f.axes()[i].name << ":" << f.axes()[i].extent;
    }
    os << "\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        put_le_double(os, f[i].real());
        if (f.dtype() == DType::complex128) put_le_double(os, f[i].imag());
    }
}

void write_field_file(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_field(os, f);
}

Field read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ParseError("field file: missing header");
    std::istringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "opgfield" || version != "v1")
        throw ParseError("field file: bad magic '" + magic + " " + version + "'");

    TypeInfo t;
    std::string tok;
    bool have_dtype = false, have_axes = false;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("field file: bad header token '" + tok + "'");
        std::string key = tok.substr(0, eq);
        std::string val = tok.substr(eq + 1);
        if (key == "dtype") {
            t.dtype = dtype_from_name(val);
            have_dtype = true;
        } else if (key == "units") {
            // quoted; units strings contain no whitespace in this format
            if (val.size() < 2 || val.front() != '"' || val.back() != '"')
                throw ParseError("field file: units must be quoted");
            t.units = val.substr(1, val.size() - 2);
        } else if (key == "axes") {
            std::istringstream as(val);
            std::string part;
            while (std::getline(as, part, ',')) {
                auto colon = part.find(':');
                if (colon == std::string::npos)
                    throw ParseError("field file: bad axis spec '" + part + "'");
                Axis a;
                a.name = part.substr(0, colon);
                a.extent = std::stoull(part.substr(colon + 1));
                if (a.extent == 0) throw ParseError("field file: zero axis extent");
                t.axes.push_back(a);
            }
            have_axes = true;
        } else {
            throw ParseError("field file: unknown header key '" + key + "'");
        }
    }
    if (!have_dtype || !have_axes) throw ParseError("field file: header missing dtype or axes");

    Field f(t);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double re = get_le_double(is);
        double im = (t.dtype == DType::complex128) ? get_le_double(is) : 0.0;
        f[i] = {re, im};
    }
    return f;
}

Field read_field_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_field(is);
}

} // namespace opg
