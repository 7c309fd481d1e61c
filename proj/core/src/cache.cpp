#include "axiscat/cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "cache format assumes a little-endian host");

namespace axiscat {

namespace {

constexpr char kOperatorMagic[8] = {'A', 'X', 'S', 'C', 'O', 'P', '0', '1'};
constexpr char kSkeletonMagic[8] = {'A', 'X', 'S', 'C', 'S', 'K', '0', '1'};

std::uint64_t fnv1a(const void* data, size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return bool(is);
}

void put_matrix(std::ostream& os, const Eigen::MatrixXcd& m) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  put(os, rows);
  put(os, cols);
  os.write(reinterpret_cast<const char*>(m.data()), sizeof(Complex) * rows * cols);
}

bool get_matrix(std::istream& is, Eigen::MatrixXcd& m) {
  std::int64_t rows = 0, cols = 0;
  if (!get(is, rows) || !get(is, cols)) return false;
  if (rows < 0 || cols < 0 || rows * cols > (1ll << 32)) return false;
  m.resize(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()), sizeof(Complex) * rows * cols);
  return bool(is);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

std::uint64_t OperatorCache::Key::hash() const {
  std::uint64_t h = fnv1a(&shape_hash, sizeof shape_hash);
  h = fnv1a(&r_panels, sizeof r_panels, h);
  h = fnv1a(&gauss_order, sizeof gauss_order, h);
  h = fnv1a(&n_fourier, sizeof n_fourier, h);
  h = fnv1a(&kappa, sizeof kappa, h);
  h = fnv1a(&equation, sizeof equation, h);
  h = fnv1a(&coupling, sizeof coupling, h);
  return h;
}

std::uint64_t OperatorCache::SkeletonKey::hash() const {
  std::uint64_t base = op.hash();
  std::uint64_t h = fnv1a(&base, sizeof base);
  h = fnv1a(&epsilon, sizeof epsilon, h);
  h = fnv1a(&proxy_radius, sizeof proxy_radius, h);
  h = fnv1a(&proxy_points_hint, sizeof proxy_points_hint, h);
  h = fnv1a(&seed, sizeof seed, h);
  return h;
}

OperatorCache::OperatorCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path OperatorCache::operator_path(const Key& key) const {
  return dir_ / (hex64(key.hash()) + ".op.bin");
}

std::filesystem::path OperatorCache::skeleton_path(const SkeletonKey& key) const {
  return dir_ / (hex64(key.hash()) + ".sk.bin");
}

void OperatorCache::store(const Key& key, const BodyOperator& op) const {
  std::ofstream os(operator_path(key), std::ios::binary | std::ios::trunc);
  if (!os) throw SolverError("cache: cannot open " + operator_path(key).string());
  os.write(kOperatorMagic, sizeof kOperatorMagic);
  put(os, key.hash());

  const ModalSystem& ms = op.system();
  put(os, std::int32_t(ms.n_curve));
  put(os, std::int32_t(ms.n_fourier));
  put(os, ms.kappa.value);
  put(os, std::int32_t(ms.spec.equation));
  put(os, ms.spec.coupling);
  const std::int32_t n_modes = static_cast<std::int32_t>(ms.modes.size());
  put(os, n_modes);
  for (int p = 0; p < n_modes; ++p) {
    put_matrix(os, ms.modes[p]);
    put_matrix(os, op.lu_matrix(p));
    const auto& perm = op.permutation(p);
    const std::int64_t len = perm.size();
    put(os, len);
    os.write(reinterpret_cast<const char*>(perm.data()), sizeof(int) * len);
    put(os, op.condition_estimate(p));
  }
}

std::optional<BodyOperator> OperatorCache::load(const Key& key) const {
  std::ifstream is(operator_path(key), std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kOperatorMagic, sizeof magic) != 0) return std::nullopt;
  std::uint64_t stored_hash = 0;
  if (!get(is, stored_hash) || stored_hash != key.hash()) return std::nullopt;

  auto ms = std::make_shared<ModalSystem>();
  std::int32_t n_curve = 0, n_fourier = 0, eq = 0, n_modes = 0;
  double kappa = 0;
  Complex coupling;
  if (!get(is, n_curve) || !get(is, n_fourier) || !get(is, kappa) || !get(is, eq) ||
      !get(is, coupling) || !get(is, n_modes))
    return std::nullopt;
  ms->n_curve = n_curve;
  ms->n_fourier = n_fourier;
  ms->kappa = WaveNumber(kappa);
  ms->spec.equation = static_cast<Equation>(eq);
  ms->spec.coupling = coupling;
  ms->modes.resize(n_modes);

  std::vector<Eigen::MatrixXcd> lu(n_modes);
  std::vector<Eigen::VectorXi> perm(n_modes);
  std::vector<double> cond(n_modes);
  for (int p = 0; p < n_modes; ++p) {
    if (!get_matrix(is, ms->modes[p]) || !get_matrix(is, lu[p])) return std::nullopt;
    std::int64_t len = 0;
    if (!get(is, len) || len != n_curve) return std::nullopt;
    perm[p].resize(len);
    is.read(reinterpret_cast<char*>(perm[p].data()), sizeof(int) * len);
    if (!is || !get(is, cond[p])) return std::nullopt;
  }
  return BodyOperator::from_parts(std::move(ms), std::move(lu), std::move(perm),
                                  std::move(cond));
}

void OperatorCache::store_skeleton(const SkeletonKey& key, const SkeletonData& sk) const {
  std::ofstream os(skeleton_path(key), std::ios::binary | std::ios::trunc);
  if (!os) throw SolverError("cache: cannot open " + skeleton_path(key).string());
  os.write(kSkeletonMagic, sizeof kSkeletonMagic);
  put(os, key.hash());
  put(os, std::int32_t(sk.body));
  put(os, std::int32_t(sk.rank));
  const std::int64_t n_idx = static_cast<std::int64_t>(sk.skeleton.size());
  put(os, n_idx);
  os.write(reinterpret_cast<const char*>(sk.skeleton.data()), sizeof(int) * n_idx);
  put_matrix(os, sk.U);
  put(os, sk.epsilon);
  put(os, sk.proxy_radius);
  put(os, std::int32_t(sk.proxy_points));
  put(os, std::int32_t(sk.enlargements));
  put(os, std::uint8_t(sk.proxy_clipped ? 1 : 0));
  put(os, sk.seed);
}

std::optional<SkeletonData> OperatorCache::load_skeleton(const SkeletonKey& key) const {
  std::ifstream is(skeleton_path(key), std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kSkeletonMagic, sizeof magic) != 0) return std::nullopt;
  std::uint64_t stored_hash = 0;
  if (!get(is, stored_hash) || stored_hash != key.hash()) return std::nullopt;

  SkeletonData sk;
  std::int32_t body = 0, rank = 0, proxy_points = 0, enlargements = 0;
  std::int64_t n_idx = 0;
  if (!get(is, body) || !get(is, rank) || !get(is, n_idx)) return std::nullopt;
  sk.body = body;
  sk.rank = rank;
  sk.skeleton.resize(n_idx);
  is.read(reinterpret_cast<char*>(sk.skeleton.data()), sizeof(int) * n_idx);
  if (!is || !get_matrix(is, sk.U)) return std::nullopt;
  std::uint8_t clipped = 0;
  if (!get(is, sk.epsilon) || !get(is, sk.proxy_radius) || !get(is, proxy_points) ||
      !get(is, enlargements) || !get(is, clipped) || !get(is, sk.seed))
    return std::nullopt;
  sk.proxy_points = proxy_points;
  sk.enlargements = enlargements;
  sk.proxy_clipped = clipped != 0;
  sk.V = sk.U.conjugate();
  return sk;
}

std::vector<OperatorCache::EntryInfo> OperatorCache::inspect() const {
  std::vector<EntryInfo> out;
  if (!std::filesystem::exists(dir_)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    EntryInfo info;
    const std::string name = e.path().filename().string();
    if (name.ends_with(".op.bin"))
      info.kind = "operator";
    else if (name.ends_with(".sk.bin"))
      info.kind = "skeleton";
    else
      continue;
    info.file = e.path().string();
    info.bytes = e.file_size();
    std::ifstream is(e.path(), std::ios::binary);
    char magic[8];
    is.read(magic, sizeof magic);
    get(is, info.key_hash);
    out.push_back(std::move(info));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
  return out;
}

int OperatorCache::clear() const {
  int removed = 0;
  if (!std::filesystem::exists(dir_)) return removed;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    const std::string name = e.path().filename().string();
    if (name.ends_with(".op.bin") || name.ends_with(".sk.bin")) {
      std::filesystem::remove(e.path());
      ++removed;
    }
  }
  return removed;
}

}  // namespace axiscat
