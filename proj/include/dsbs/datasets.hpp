#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "dsbs/dataset.hpp"
#include "dsbs/gmm.hpp"

namespace dsbs {

/// Two interleaving half circles: ceil(n/2) points on (cos u, sin u) and the rest on
/// (1 - cos u, 0.5 - sin u), u uniform on [0, pi], plus isotropic Gaussian jitter.
Dataset make_moons(std::size_t n, double noise_std, std::uint64_t seed);

/// Uniform mixture of 8 isotropic Gaussians centred at radius * (cos(k pi/4), sin(k pi/4)),
/// the whole cloud then multiplied by global_scale.
Dataset make_eight_gaussians(std::size_t n, double radius, double component_std, double global_scale,
                             std::uint64_t seed);

/// The eight mode centres of make_eight_gaussians after global scaling (8 x 2).
Dataset eight_gaussian_centers(double radius, double global_scale);

/// i.i.d. draws from a Gaussian mixture.
Dataset sample_gmm(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed);

enum class FileFormat { Csv, F64le };

/// ".csv" maps to Csv, everything else to F64le.
FileFormat format_for_path(const std::filesystem::path& path);
std::string to_string(FileFormat format);

/// CSV: first line "dim=<d>", then one comma-separated row per point, shortest
/// round-trip decimal form. f64le: u64 n, u64 d (little endian) then n*d doubles.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat format);

/// Default benchmark geometry.
namespace benchmark_defaults {
inline constexpr double kMoonsNoise = 0.1;
inline constexpr double kEightRadius = 4.0;
inline constexpr double kEightComponentStd = 0.5;
inline const double kEightGlobalScale = 1.0 / std::sqrt(2.0);
} // namespace benchmark_defaults

namespace dataset_kind {
struct Moons { double noise_std = benchmark_defaults::kMoonsNoise; };
struct EightGaussians {
    double radius = benchmark_defaults::kEightRadius;
    double component_std = benchmark_defaults::kEightComponentStd;
    double global_scale = benchmark_defaults::kEightGlobalScale;
};
struct Gmm { GaussianMixture mixture; };
struct File { std::filesystem::path path; FileFormat format = FileFormat::F64le; };
} // namespace dataset_kind

struct DatasetSpec {
    std::variant<dataset_kind::Moons, dataset_kind::EightGaussians, dataset_kind::Gmm, dataset_kind::File> kind;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
};

/// Generates (or loads) the dataset described by `spec`.
Dataset generate(const DatasetSpec& spec);

} // namespace dsbs
