#include "nle/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace nle {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw NumericalError("truncated snapshot: " + path.string());
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw NumericalError("cannot write " + path.string());
    return os;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
    auto os = open_out(path, true);
    os.write("DLS1", 4);
    const Grid& g = f.grid;
    put<std::int64_t>(os, g.dim());
    put<std::int64_t>(os, g.n());
    for (int a = 0; a < g.dim(); ++a) put<double>(os, g.origin()[a]);
    for (int a = 0; a < g.dim(); ++a) put<double>(os, g.half_width());
    put<double>(os, f.time);
    os.write(reinterpret_cast<const char*>(f.values.data()), std::streamsize(f.values.size() * sizeof(double)));
    if (!os) throw NumericalError("failed writing " + path.string());
}

ScalarField read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open snapshot " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "DLS1", 4) != 0)
        throw ConfigError("not a DLS1 snapshot: " + path.string());
    const auto dim = get<std::int64_t>(is, path);
    const auto n = get<std::int64_t>(is, path);
    if (dim < 1 || dim > 2 || n < 3 || n > (1 << 20)) throw ConfigError("corrupt snapshot header: " + path.string());
    Point origin{0.0, 0.0};
    double extent[2] = {0.0, 0.0};
    for (int a = 0; a < dim; ++a) origin[a] = get<double>(is, path);
    for (int a = 0; a < dim; ++a) extent[a] = get<double>(is, path);
    if (dim == 2 && extent[0] != extent[1]) throw ConfigError("snapshot grids must be square: " + path.string());
    const double time = get<double>(is, path);
    const Grid g = Grid::make(int(dim), extent[0], int(n), origin);
    std::vector<double> values(g.size());
    if (!is.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(double))))
        throw NumericalError("truncated snapshot: " + path.string());
    return ScalarField(g, std::move(values), time);
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
    auto os = open_out(path, false);
    os.precision(17);
    os << (f.grid.dim() == 1 ? "x,value\n" : "x,y,value\n");
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Point p = f.grid.position(k);
        os << p[0] << ',';
        if (f.grid.dim() == 2) os << p[1] << ',';
        os << f.values[k] << '\n';
    }
}

void write_pgm(const std::filesystem::path& path, const ScalarField& f, double band) {
    auto os = open_out(path, true);
    const int n = f.grid.n();
    const int rows = f.grid.dim() == 1 ? 1 : n;
    os << "P5\n" << n << ' ' << rows << "\n255\n";
    // Top row is the largest y.
    for (int r = rows - 1; r >= 0; --r)
        for (int i = 0; i < n; ++i) {
            const double v = f.values[f.grid.dim() == 1 ? std::size_t(i) : f.grid.index(i, r)];
            unsigned char px = 0;
            if (std::abs(v) > band) {
                const double s = (1.0 - std::clamp(v, -1.0, 1.0)) * 0.5;  // -1 -> 1, 1 -> 0
                px = static_cast<unsigned char>(std::lround(255.0 * s));
            }
            os.put(char(px));
        }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    auto os = open_out(path, false);
    for (const auto& [k, v] : m) os << k << '=' << v << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open manifest " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("malformed manifest line: " + line);
        m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

}  // namespace nle
