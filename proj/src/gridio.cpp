#include "vlq/gridio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vlq/config.hpp"
#include "vlq/error.hpp"

namespace vlq {

namespace {

void put_le(std::ostream& os, double v)
{
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    char buf[8];
    std::memcpy(buf, &u, 8);
    os.write(buf, 8);
}

double get_le(char const* p)
{
    std::uint64_t u;
    std::memcpy(&u, p, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void write_f64grid(std::ostream& os, DistFn const& f)
{
    os << "F64GRID nx=" << f.grid.nx << " nv=" << f.grid.nv() << " vmax=" << format_double(f.grid.vmax())
       << " time=" << format_double(f.time) << "\n";
    for (double v : f.values) put_le(os, v);
    if (!os) throw NumericalError("F64GRID write failed");
}

void write_f64grid(std::string const& path, DistFn const& f)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    write_f64grid(os, f);
}

DistFn read_f64grid(std::istream& is)
{
    std::string header;
    if (!std::getline(is, header)) throw InvalidArgument("F64GRID: missing header");
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "F64GRID") throw InvalidArgument("F64GRID: bad magic '" + magic + "'");
    std::size_t nx = 0, nv = 0;
    double vmax = 0.0, time = 0.0;
    bool got[4] = {};
    std::string tok;
    while (hs >> tok) {
        auto const eq = tok.find('=');
        if (eq == std::string::npos) throw InvalidArgument("F64GRID: bad header field '" + tok + "'");
        auto const key = tok.substr(0, eq);
        auto const val = tok.substr(eq + 1);
        auto num = parse_double(val);
        if (!num) throw InvalidArgument("F64GRID: bad value in '" + tok + "'");
        if (key == "nx") nx = static_cast<std::size_t>(*num), got[0] = true;
        else if (key == "nv") nv = static_cast<std::size_t>(*num), got[1] = true;
        else if (key == "vmax") vmax = *num, got[2] = true;
        else if (key == "time") time = *num, got[3] = true;
        else throw InvalidArgument("F64GRID: unknown header field '" + key + "'");
    }
    if (!(got[0] && got[1] && got[2] && got[3])) throw InvalidArgument("F64GRID: incomplete header");
    DistFn f(PhaseGrid(nx, nv, vmax), time);
    std::vector<char> buf(f.values.size() * 8);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw InvalidArgument("F64GRID: truncated payload");
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = get_le(buf.data() + 8 * i);
    return f;
}

DistFn read_f64grid(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot open '" + path + "'");
    return read_f64grid(is);
}

std::vector<DistFn> read_f64grid_stack(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot open '" + path + "'");
    std::vector<DistFn> out;
    while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_f64grid(is));
    return out;
}

}  // namespace vlq
