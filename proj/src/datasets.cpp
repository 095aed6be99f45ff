#include "dsbs/datasets.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dsbs/errors.hpp"
#include "dsbs/rng.hpp"

namespace dsbs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_n(std::size_t n) {
    if (n == 0) throw InvalidArgument("dataset size must be at least 1");
}

} // namespace

Dataset make_moons(std::size_t n, double noise_std, std::uint64_t seed) {
    check_n(n);
    if (!(noise_std >= 0.0)) throw InvalidArgument("make_moons: noise_std must be nonnegative");
    RandomStream rng(seed, 0);
    const std::size_t upper = (n + 1) / 2;
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double angle = std::numbers::pi * rng.uniform();
        double x, y;
        if (i < upper) {
            x = std::cos(angle);
            y = std::sin(angle);
        } else {
            x = 1.0 - std::cos(angle);
            y = 0.5 - std::sin(angle);
        }
        values[2 * i] = x;
        values[2 * i + 1] = y;
    }
    if (noise_std > 0.0)
        for (double& v : values) v += noise_std * rng.normal();
    return Dataset(n, 2, std::move(values));
}

Dataset eight_gaussian_centers(double radius, double global_scale) {
    std::vector<double> values(16);
    for (int k = 0; k < 8; ++k) {
        const double angle = k * std::numbers::pi / 4.0;
        values[2 * k] = global_scale * radius * std::cos(angle);
        values[2 * k + 1] = global_scale * radius * std::sin(angle);
    }
    return Dataset(8, 2, std::move(values));
}

Dataset make_eight_gaussians(std::size_t n, double radius, double component_std, double global_scale,
                             std::uint64_t seed) {
    check_n(n);
    if (!(radius > 0.0)) throw InvalidArgument("make_eight_gaussians: radius must be positive");
    if (!(component_std >= 0.0)) throw InvalidArgument("make_eight_gaussians: component_std must be nonnegative");
    if (!std::isfinite(global_scale)) throw InvalidArgument("make_eight_gaussians: global_scale must be finite");
    RandomStream rng(seed, 0);
    std::array<double, 16> centers{};
    for (int k = 0; k < 8; ++k) {
        const double angle = k * std::numbers::pi / 4.0;
        centers[2 * k] = radius * std::cos(angle);
        centers[2 * k + 1] = radius * std::sin(angle);
    }
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(rng.below(8));
        const double zx = rng.normal();
        const double zy = rng.normal();
        values[2 * i] = (centers[2 * k] + component_std * zx) * global_scale;
        values[2 * i + 1] = (centers[2 * k + 1] + component_std * zy) * global_scale;
    }
    return Dataset(n, 2, std::move(values));
}

Dataset sample_gmm(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed) {
    check_n(n);
    gmm.validate();
    const std::size_t d = gmm.dim();
    std::vector<Eigen::MatrixXd> factors;
    for (const auto& cov : gmm.covariances) factors.push_back(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL());

    RandomStream rng(seed, 0);
    std::vector<double> values(n * d);
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double cumulative = gmm.weights[0];
        while (u >= cumulative && k + 1 < gmm.components()) cumulative += gmm.weights[++k];
        // Land on a component with positive weight even when rounding leaves u past the total.
        while (gmm.weights[k] == 0.0 && k > 0) --k;
        for (auto& v : z) v = rng.normal();
        const Eigen::VectorXd point = gmm.means[k] + factors[k] * z;
        std::copy(point.data(), point.data() + d, values.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    return Dataset(n, d, std::move(values));
}

FileFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? FileFormat::Csv : FileFormat::F64le;
}

std::string to_string(FileFormat format) {
    return format == FileFormat::Csv ? "csv" : "f64le";
}

namespace {

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": line 1: missing 'dim=<d>' header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t d = 0;
    if (line.rfind("dim=", 0) != 0) throw ParseError(path.string() + ": line 1: expected 'dim=<d>' header", 1);
    {
        const char* first = line.data() + 4;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, d);
        if (ec != std::errc() || ptr != last || d == 0)
            throw ParseError(path.string() + ": line 1: malformed dimension in header", 1);
    }
    std::vector<double> values;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        std::size_t fields = 0;
        while (true) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(p, end, v);
            if (ec != std::errc())
                throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": malformed number", line_no);
            values.push_back(v);
            ++fields;
            p = ptr;
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            if (*p != ',')
                throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": unexpected character",
                                 line_no);
            ++p;
        }
        if (fields != d)
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                                 " values, found " + std::to_string(fields),
                             line_no);
        ++n;
    }
    if (n == 0) throw ParseError(path.string() + ": no data rows (a dataset needs at least one point)", line_no);
    try {
        return Dataset(n, d, std::move(values));
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what(), line_no);
    }
}

Dataset load_f64le(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<std::uint64_t, 2> header{};
    in.read(reinterpret_cast<char*>(header.data()), sizeof header);
    if (in.gcount() != static_cast<std::streamsize>(sizeof header))
        throw ParseError(path.string() + ": byte " + std::to_string(in.gcount()) + ": truncated 16-byte header",
                         static_cast<std::size_t>(in.gcount()));
    const std::uint64_t n = to_le(header[0]);
    const std::uint64_t d = to_le(header[1]);
    if (n == 0) throw ParseError(path.string() + ": byte 0: header declares n = 0 (need at least one point)", 0);
    if (d == 0) throw ParseError(path.string() + ": byte 8: header declares d = 0", 8);
    if (n > (std::uint64_t{1} << 40) / d) throw ParseError(path.string() + ": byte 0: implausible header size", 0);

    std::vector<double> values(n * d);
    const auto bytes = static_cast<std::streamsize>(values.size() * sizeof(double));
    in.read(reinterpret_cast<char*>(values.data()), bytes);
    if (in.gcount() != bytes)
        throw ParseError(path.string() + ": byte " + std::to_string(16 + in.gcount()) + ": truncated payload, expected " +
                             std::to_string(16 + bytes) + " bytes",
                         static_cast<std::size_t>(16 + in.gcount()));
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError(path.string() + ": byte " + std::to_string(16 + bytes) + ": trailing bytes after payload",
                         static_cast<std::size_t>(16 + bytes));
    if constexpr (std::endian::native == std::endian::big) {
        for (double& v : values) v = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(v)));
    }
    try {
        return Dataset(n, d, std::move(values));
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what(), 16);
    }
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
    return format == FileFormat::Csv ? load_csv(path) : load_f64le(path);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat format) {
    if (format == FileFormat::Csv) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        out << "dim=" << ds.dim() << '\n';
        char buf[64];
        for (std::size_t i = 0; i < ds.size(); ++i) {
            for (std::size_t k = 0; k < ds.dim(); ++k) {
                if (k) out << ',';
                auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ds(i, k));
                out.write(buf, ptr - buf);
            }
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + path.string());
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::array<std::uint64_t, 2> header{to_le(ds.size()), to_le(ds.dim())};
    out.write(reinterpret_cast<const char*>(header.data()), sizeof header);
    if constexpr (std::endian::native == std::endian::big) {
        for (double v : ds.values()) {
            const std::uint64_t bits = __builtin_bswap64(std::bit_cast<std::uint64_t>(v));
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    } else {
        const auto values = ds.values();
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset generate(const DatasetSpec& spec) {
    return std::visit(overloaded{
                          [&](const dataset_kind::Moons& m) { return make_moons(spec.n, m.noise_std, spec.seed); },
                          [&](const dataset_kind::EightGaussians& g) {
                              return make_eight_gaussians(spec.n, g.radius, g.component_std, g.global_scale,
                                                          spec.seed);
                          },
                          [&](const dataset_kind::Gmm& g) { return sample_gmm(g.mixture, spec.n, spec.seed); },
                          [&](const dataset_kind::File& f) { return load_dataset(f.path, f.format); },
                      },
                      spec.kind);
}

} // namespace dsbs
