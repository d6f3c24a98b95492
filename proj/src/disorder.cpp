#include "sphtap/disorder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "sphtap/errors.hpp"
#include "sphtap/rng.hpp"
#include "sphtap/spectrum.hpp"

namespace sphtap {

struct DisorderSample::Cache {
  std::once_flag once;
  EigenDecomp value;
};

DisorderSample::DisorderSample(int size, std::uint64_t seed, Eigen::MatrixXd coupling)
    : seed_(seed), g_(std::move(coupling)), cache_(std::make_shared<Cache>()) {
  if (g_.rows() != size || g_.cols() != size) {
    throw InputError("DisorderSample: coupling matrix does not match N");
  }
}

double DisorderSample::hamiltonian(const Eigen::Ref<const Eigen::VectorXd>& m) const {
  if (m.size() != g_.rows()) throw InputError("hamiltonian: vector length differs from N");
  return m.dot(g_ * m);
}

Eigen::VectorXd DisorderSample::gradient(const Eigen::Ref<const Eigen::VectorXd>& m) const {
  if (m.size() != g_.rows()) throw InputError("gradient: vector length differs from N");
  return 2.0 * (g_ * m);
}

const EigenDecomp& DisorderSample::spectrum() const {
  std::call_once(cache_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g_, Eigen::ComputeEigenvectors);
    cache_->value.values = solver.eigenvalues() / static_cast<double>(size());
    cache_->value.vectors = solver.eigenvectors();
  });
  return cache_->value;
}

void DisorderSample::adopt_spectrum(EigenDecomp spectrum) const {
  const auto n = g_.rows();
  if (spectrum.values.size() != n || spectrum.vectors.rows() != n ||
      spectrum.vectors.cols() != n) {
    throw InputError("adopt_spectrum: spectrum shape does not match N");
  }
  std::call_once(cache_->once, [&] { cache_->value = std::move(spectrum); });
}

DisorderSample sample_goe(int size, std::uint64_t seed) {
  if (size < 2) throw InputError("sample_goe: N must be at least 2");
  Engine eng = make_engine(seed, 0);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd j(size, size);
  for (int c = 0; c < size; ++c) {
    for (int r = 0; r < size; ++r) j(r, c) = normal(eng);
  }
  const double scale = 0.5 * std::sqrt(static_cast<double>(size));
  Eigen::MatrixXd g = scale * (j + j.transpose());
  return DisorderSample(size, seed, std::move(g));
}

Eigen::VectorXd deterministic_spectrum(int size) {
  if (size < 1) throw InputError("deterministic_spectrum: N must be positive");
  Eigen::VectorXd theta(size);
  for (int i = 1; i <= size; ++i) {
    theta(i - 1) = semicircle::classical_location(static_cast<double>(i) / size);
  }
  return theta;
}

Eigen::MatrixXd FiniteSystem::fields(const Eigen::VectorXd& hmag) const {
  return hmag * direction.transpose();
}

Eigen::VectorXd random_direction(int size, std::uint64_t seed, std::uint64_t index) {
  if (size < 1) throw InputError("random_direction: N must be positive");
  Engine eng = make_engine(seed, index);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(size);
  for (int i = 0; i < size; ++i) u(i) = normal(eng);
  return u / u.norm();
}

FiniteSystem make_finite_system(int size, std::uint64_t seed, SpectrumSource source) {
  FiniteSystem sys;
  if (source == SpectrumSource::deterministic) {
    sys.thetas = deterministic_spectrum(size);
  } else {
    sys.thetas = sample_goe(size, seed).spectrum().values;
  }
  // A uniform direction has uniform coordinates in any orthonormal basis.
  sys.direction = random_direction(size, seed, 1);
  return sys;
}

FiniteSystem finite_system_of(const DisorderSample& sample, const Eigen::VectorXd& direction) {
  if (direction.size() != sample.size()) {
    throw InputError("finite_system_of: direction length differs from N");
  }
  const EigenDecomp& e = sample.spectrum();
  return FiniteSystem{e.values, e.vectors.transpose() * direction.normalized()};
}

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'P', 'H', 'T', 'A', 'P', 'E', 'V'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("spectrum cache: truncated file");
  return to_little(v);
}

}  // namespace

void save_spectrum_cache(const std::filesystem::path& path, const DisorderSample& sample) {
  const EigenDecomp& e = sample.spectrum();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("spectrum cache: cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kSpectrumCacheVersion);
  put<std::uint32_t>(os, 0);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(sample.size()));
  put<std::uint64_t>(os, sample.seed());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) put<double>(os, e.values(i));
  for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < e.vectors.rows(); ++r) put<double>(os, e.vectors(r, c));
  }
  if (!os) throw InputError("spectrum cache: write failed for " + path.string());
}

EigenDecomp load_spectrum_cache(const std::filesystem::path& path, int size,
                                std::uint64_t seed) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("spectrum cache: cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw InputError("spectrum cache: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(is);
  if (version != kSpectrumCacheVersion) {
    std::ostringstream os;
    os << "spectrum cache: unsupported version " << version;
    throw InputError(os.str());
  }
  (void)get<std::uint32_t>(is);
  const auto n = get<std::uint64_t>(is);
  const auto s = get<std::uint64_t>(is);
  if (n != static_cast<std::uint64_t>(size) || s != seed) {
    std::ostringstream os;
    os << "spectrum cache: key (" << n << ", " << s << ") does not match (" << size << ", "
       << seed << ")";
    throw InputError(os.str());
  }
  EigenDecomp e;
  e.values.resize(size);
  e.vectors.resize(size, size);
  for (int i = 0; i < size; ++i) e.values(i) = get<double>(is);
  for (int c = 0; c < size; ++c) {
    for (int r = 0; r < size; ++r) e.vectors(r, c) = get<double>(is);
  }
  return e;
}

DisorderSample sample_goe_cached(int size, std::uint64_t seed,
                                 const std::filesystem::path& path) {
  DisorderSample sample = sample_goe(size, seed);
  if (std::filesystem::exists(path)) {
    sample.adopt_spectrum(load_spectrum_cache(path, size, seed));
  } else {
    save_spectrum_cache(path, sample);
  }
  return sample;
}

}  // namespace sphtap
